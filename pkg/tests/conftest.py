import numpy as np
import pytest

from polylab import chemcore as cc
from polylab import encoders as en


TINY_ENC = dict(d_model=16, n_layers=2, n_heads=2, ffn_dim=32,
                d_g=12, gnn_layers=2, d_s=12, interaction_layers=2,
                fp_embed_dim=12, fp_heads=2, fp_ffn=24, fp_seq_len=32,
                d_shared=12, max_seq_len=96)


@pytest.fixture(scope="session")
def vocab():
    return cc.TokenVocabulary.default()


@pytest.fixture(scope="session")
def tiny_cfg():
    return en.EncoderConfig(**TINY_ENC)


@pytest.fixture(scope="session")
def tiny_store(tiny_cfg):
    return en.init_all_params(tiny_cfg, seed=7)


@pytest.fixture(scope="session")
def featurized_records(vocab, tiny_cfg):
    texts = cc.synthesize_corpus(30, seed=5)
    records = [cc.PolymerRecord(psmiles=t) for t in texts]
    cc.featurize_dataset(records, vocab=vocab,
                         fp_bits=tiny_cfg.fp_seq_len, seed=0)
    return records


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


def permute_graph(graph, perm):
    """Rebuild a PolymerGraph with atoms reordered by `perm`."""
    inv = np.argsort(perm)
    atoms = [graph.atoms[i] for i in perm]
    bonds = [cc.Bond(u=int(inv[b.u]), v=int(inv[b.v]), order=b.order,
                     stereo=b.stereo, conjugated=b.conjugated)
             for b in graph.bonds]
    termini = tuple(int(inv[i]) for i in graph.terminus_atoms)
    return cc.PolymerGraph(atoms=atoms, bonds=bonds,
                           terminus_atoms=termini)
