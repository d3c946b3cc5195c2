"""One façade over the trained artifacts.

The CLI, the HTTP service, and the agent toolset all call through this
class, which keeps their outputs byte-identical for the same snapshot,
request, and seed.
"""

import hashlib

import numpy as np

from .. import designgen as dg
from .. import propreg as pr
from ..agentloop import occlusion_attribution, select_highlights
from ..chemcore import (
    PolymerRecord,
    TokenVocabulary,
    canonical_key,
    compute_ecfp,
    embed_conformer,
    featurize_record,
    parse_psmiles,
    substitute_terminus,
    tokenize,
)
from ..chemcore.canonical import serialize
from ..encoders import (
    encode_fingerprint,
    encode_geometry,
    encode_graph,
    encode_sequence,
    fuse_all,
    project,
)
from ..evidence import (
    EvidenceEngine,
    HashedBowEmbedder,
    fetch_web,
    rewrite_query,
    score_web_results,
)
from ..propreg.scaler import TargetScaler


class SnapshotMissingError(RuntimeError):
    pass


def render_id(psmiles):
    return hashlib.sha1(psmiles.encode("utf-8")).hexdigest()[:12]


class Pipeline:
    def __init__(self, config, store, data=None, scalers=None, records=None,
                 engine=None, vocab=None):
        self.config = config
        self.store = store
        self.data = data or {}
        self.scaler_dicts = scalers or {}
        self.records = records or []
        self.engine = engine
        self.vocab = vocab or TokenVocabulary.default()
        self.enc_cfg = config.encoder_config()
        self._render_registry = {}
        self._gen_cfg = config.section("generation")
        self._oracles = {}

    # ------------------------------------------------------------ helpers

    def _record_for(self, psmiles):
        record = PolymerRecord(psmiles=psmiles)
        featurize_record(record, vocab=self.vocab,
                         fp_bits=self.enc_cfg.fp_seq_len,
                         seed=self.config["seed"])
        return record

    def _graph_embedding(self, graph):
        """Fused embedding for a bare graph (occlusion path)."""
        text = serialize(graph, 0)
        tokens = tokenize(text, self.vocab)
        conformer = embed_conformer(graph, seed=self.config["seed"])
        fp = compute_ecfp(graph, nbits=self.enc_cfg.fp_seq_len)
        outs = [
            encode_sequence(tokens.ids, self.enc_cfg, self.store),
            encode_graph(graph, self.enc_cfg, self.store),
            encode_geometry(graph, conformer, self.enc_cfg, self.store),
            encode_fingerprint(fp.bits.astype(np.int64), self.enc_cfg,
                               self.store),
        ]
        return fuse_all([project(o, self.store) for o in outs]).value.copy()

    def scaler(self, prop):
        if prop not in self.scaler_dicts:
            values = [r.properties[prop] for r in self.records
                      if prop in r.properties]
            if not values:
                raise SnapshotMissingError(
                    f"no scaler or data for property {prop!r}")
            self.scaler_dicts[prop] = TargetScaler.fit(values).to_dict()
        return TargetScaler.from_dict(self.scaler_dicts[prop])

    def units(self, prop):
        return self.data.get("units", {}).get(prop, "") \
            if isinstance(self.data.get("units"), dict) else ""

    def head_prefix(self, prop):
        return f"head.{prop}"

    def has_head(self, prop):
        return f"{self.head_prefix(prop)}.W1" in self.store

    # ------------------------------------------------------------ predict

    def predict_embedding(self, embedding, prop):
        if not self.has_head(prop):
            raise SnapshotMissingError(
                f"no trained head for property {prop!r}")
        value = pr.predict(self.store, self.scaler(prop),
                           np.asarray(embedding)[None, :],
                           head_prefix=self.head_prefix(prop))
        return float(value[0])

    def predict(self, psmiles, properties):
        record = self._record_for(psmiles)
        self._render_registry[render_id(psmiles)] = record.graph
        g = pr.fused_embed(record, self.enc_cfg, self.store)
        out = []
        for prop in properties:
            out.append({"psmiles": psmiles, "property": prop,
                        "value": self.predict_embedding(g, prop),
                        "units": self.units(prop)})
        return out

    # ----------------------------------------------------------- generate

    def latents(self):
        if "latents" not in self.data:
            if not self.records:
                raise SnapshotMissingError("no training records available")
            self.data["latents"] = pr.embed_dataset(
                self.records, self.enc_cfg, self.store)
        return np.asarray(self.data["latents"], dtype=np.float64)

    def decoder_model_config(self):
        g = self._gen_cfg
        return dg.DecoderModelConfig(
            d_model=g["d_model"], n_layers=g["n_layers"],
            n_heads=g["n_heads"], ffn_dim=g["ffn_dim"],
            max_len=g["max_len"] + 4, vocab_size=len(self.vocab))

    def ensure_generator(self):
        model_cfg = self.decoder_model_config()
        if "gen.Wcond" not in self.store:
            rng = np.random.default_rng([self.config["seed"], 81])
            dg.init_decoder_params(self.store, model_cfg,
                                   self.enc_cfg.d_shared, rng)
            latents = self.latents()
            dg.train_generator(
                self.records, latents, self.store, model_cfg, self.vocab,
                dg.GenTrainConfig(epochs=self._gen_cfg["epochs"],
                                  lr=self._gen_cfg["lr"],
                                  batch=self._gen_cfg["batch"],
                                  sigma_train=self._gen_cfg["sigma_train"],
                                  seed=self.config["seed"]))
        return model_cfg

    def oracle(self, prop):
        if prop not in self._oracles:
            key_x, key_a = f"gp.{prop}.x", f"gp.{prop}.alpha"
            if key_x in self.data and key_a in self.data:
                self._oracles[prop] = dg.GpOracle(
                    train_x=np.asarray(self.data[key_x]),
                    alpha=np.asarray(self.data[key_a]),
                    length_scale=1.0, signal_var=1.0, noise_var=1e-4,
                    jitter=0.0)
            else:
                latents = self.latents()
                scaler = self.scaler(prop)
                y = scaler.transform([r.properties[prop]
                                      for r in self.records])
                oracle = dg.gp_fit(latents, y)
                self.data[key_x] = oracle.train_x
                self.data[key_a] = oracle.alpha
                self._oracles[prop] = oracle
        return self._oracles[prop]

    def generate(self, prop, target, n, seed=None):
        """Target is in original units; filtering runs in scaled units."""
        model_cfg = self.ensure_generator()
        scaler = self.scaler(prop)
        y_target = float(scaler.transform([target])[0])
        latents = self.latents()
        scaled = scaler.transform([r.properties[prop]
                                   for r in self.records])
        g = self._gen_cfg
        n_seeds = max(1, min(g["n_seeds"], len(self.records)))
        n_per_seed = max(1, int(np.ceil(n / n_seeds)))
        dec_cfg = dg.DecoderConfig(
            top_p=g["top_p"], temperature=g["temperature"],
            repetition_penalty=g["repetition_penalty"],
            max_len=g["max_len"], min_len=g["min_len"],
            stop_token=self.vocab.eos_id)
        candidates, histogram = dg.conditional_generate(
            y_target, scaled, latents, self.oracle(prop), self.store,
            model_cfg, self.vocab, dec_cfg=dec_cfg, n_seeds=n_seeds,
            n_per_seed=n_per_seed, sigma_gen=g["sigma_gen"],
            tau_s=g["tau_s"],
            seed=self.config["seed"] if seed is None else seed)
        report = dg.gen_metrics(
            candidates, self.records, k=g["knn_k"],
            fp_bits=self.config["retrieval"]["fp_novelty_bits"])
        for cand in candidates:
            if cand.psmiles and self.has_head(prop):
                emb = pr.fused_embed(self._record_for(cand.psmiles),
                                     self.enc_cfg, self.store)
                cand.predictions[prop] = self.predict_embedding(emb, prop)
            if cand.psmiles:
                self._render_registry[render_id(cand.psmiles)] = None
        accepted = [c for c in candidates if c.accepted][:n]
        return candidates, accepted, report, histogram

    # ---------------------------------------------------------- attribute

    def attribute(self, psmiles, prop):
        record = self._record_for(psmiles)
        graph = record.graph

        def predict_value(g):
            return self.predict_embedding(self._graph_embedding(g), prop)

        amap = occlusion_attribution(graph, predict_value)
        amap.highlights = select_highlights(amap.scores)
        self._render_registry[render_id(psmiles)] = graph
        return amap

    # ----------------------------------------------------------- retrieve

    def retrieve(self, query, k=5, web=False, connectors=None):
        rewritten = rewrite_query(
            query, year_range=self.config["retrieval"]["year_range"])
        chunks = []
        statuses = []
        if self.engine is not None:
            hits = self.engine.retrieve(
                rewritten, k=self.config["retrieval"]["ef_search"],
                ef_search=self.config["retrieval"]["ef_search"],
                top=max(k, 1))
            for chunk in hits:
                chunks.append({
                    "text": chunk.text,
                    "doc_id": chunk.doc_id,
                    "scores": dict(chunk.scores),
                    "citation": self.engine.citation_for(chunk)})
        if web and connectors:
            results, statuses = fetch_web(
                rewritten, connectors,
                now_year=self.config["retrieval"]["now_year"])
            results = score_web_results(rewritten, results)
            for res in results:
                chunks.append({
                    "text": res.snippet,
                    "doc_id": f"web:{res.source}",
                    "scores": {"web": res.score},
                    "citation": {"title": res.title, "authors": [],
                                 "year": res.year,
                                 "identifier": res.identifier}})
        return {"chunks": chunks,
                "statuses": [vars(s) for s in statuses],
                "rewritten_query": rewritten}

    # ------------------------------------------------------------- render

    def render(self, psmiles, highlights=()):
        from .render import render_svg

        graph = self._render_registry.get(render_id(psmiles))
        if graph is None:
            graph = substitute_terminus(parse_psmiles(psmiles))
            self._render_registry[render_id(psmiles)] = graph
        return render_svg(graph, highlights=highlights)

    def render_by_id(self, key):
        graph = self._render_registry.get(key)
        if graph is None:
            raise KeyError(key)
        from .render import render_svg

        return render_svg(graph)

    # ------------------------------------------------------- agent bridge

    def toolset(self, connectors=None, default_n=8):
        return _PipelineToolset(self, connectors=connectors,
                                default_n=default_n)


class _PipelineToolset:
    def __init__(self, pipeline, connectors=None, default_n=8):
        self.pipeline = pipeline
        self.connectors = connectors or []
        self.default_n = default_n

    def predict(self, properties, psmiles=None, candidates=None):
        targets = []
        if psmiles:
            targets.append(psmiles)
        for cand in candidates or []:
            if cand.get("psmiles"):
                targets.append(cand["psmiles"])
        predictions = []
        for text in targets:
            predictions.extend(self.pipeline.predict(text, list(properties)))
        return {"predictions": predictions}

    def generate(self, property, target, n):
        candidates, accepted, report, _ = self.pipeline.generate(
            property, target, n or self.default_n)
        listed = [{"psmiles": c.psmiles, "oracle_pred": c.oracle_pred,
                   "accepted": c.accepted, "novelty": c.novelty,
                   "predictions": c.predictions}
                  for c in candidates if c.psmiles]
        return {"candidates": listed, "report": report.to_dict()}

    def retrieve_local(self, query, k=5):
        return self.pipeline.retrieve(query, k=k, web=False)

    def retrieve_web(self, query, k=5):
        return self.pipeline.retrieve(query, k=k, web=True,
                                      connectors=self.connectors)

    def attribute(self, psmiles, property):
        amap = self.pipeline.attribute(psmiles, property)
        return amap.to_dict()

    def render(self, psmiles):
        return {"svg": self.pipeline.render(psmiles)}


def key_for_candidate(psmiles):
    return canonical_key(parse_psmiles(psmiles))
