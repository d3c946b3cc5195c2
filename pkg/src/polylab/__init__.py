"""polylab: desk-scale multimodal polymer informatics toolkit.

Subpackages: chemcore (parsing/featurization), tensorcore (autodiff),
encoders (modality encoders), pretrain (contrastive pretraining),
propreg (property regression), designgen (conditional generation),
evidence (retrieval), agentloop (tool routing + rubric), interfaces
(CLI/HTTP), kernels (numba-accelerated hot loops with numpy fallback).
"""

__version__ = "0.1.0"
