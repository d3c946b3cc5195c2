import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polylab import chemcore as cc
from conftest import permute_graph


# ----------------------------------------------------------------- parsing

def test_parse_smallest_repeat_unit():
    g = cc.parse_psmiles("[*]CC[*]")
    zs = [a.z for a in g.atoms]
    assert zs.count(6) == 2 and zs.count(0) == 2
    assert len(g.bonds) == 3
    assert all(b.order == 1 for b in g.bonds)
    assert len(g.terminus_atoms) == 2


def test_parse_ester_hand_built():
    g = cc.parse_psmiles("[*]OC(=O)C[*]")
    # expected heavy skeleton: O-C(=O)-C with two wildcards
    heavy = [a.z for a in g.atoms if a.z != 0]
    assert sorted(heavy) == [6, 6, 8, 8]
    orders = sorted(b.order for b in g.bonds)
    assert orders == [1, 1, 1, 1, 2]
    assert all(b.conjugated == 0 for b in g.bonds)
    # adjacency: the carbonyl carbon carries the double bond to one O
    double = [b for b in g.bonds if b.order == 2][0]
    endpoints = {g.atoms[double.u].z, g.atoms[double.v].z}
    assert endpoints == {6, 8}


def test_wildcard_count_errors():
    with pytest.raises(cc.WildcardCountError):
        cc.parse_psmiles("[*]CC")
    with pytest.raises(cc.WildcardCountError):
        cc.parse_psmiles("CCC")
    with pytest.raises(cc.WildcardCountError):
        cc.parse_psmiles("[*]C[*]C[*]")


def test_parse_rings_branches_charges():
    g = cc.parse_psmiles("[*]c1ccc(C(=O)[O-])cc1[*]")
    aromatic = [a for a in g.atoms if a.aromatic]
    assert len(aromatic) == 6
    charged = [a for a in g.atoms if a.charge == -1]
    assert len(charged) == 1
    ring_bonds = [b for b in g.bonds if b.order == 4]
    assert len(ring_bonds) == 6


def test_parse_syntax_errors():
    for bad in ["", "  ", "[*]C(C[*]", "[*]C1CC[*]", "[*]C..C[*]",
                "[*]C=[*]=", "[*]CC[*])"]:
        with pytest.raises((cc.PsmilesSyntaxError, cc.WildcardCountError)):
            cc.parse_psmiles(bad)


def test_valence_error_on_overbonded_carbon():
    with pytest.raises(cc.ValenceError):
        cc.parse_psmiles("[*]C(C)(C)(C)(C)C[*]")
    with pytest.raises(cc.ValenceError):
        cc.parse_psmiles("[*]O(C)(C)C[*]")


def test_valence_charge_adjustment():
    g = cc.parse_psmiles("[*]C[N+](C)(C)C[*]")     # quaternary N+
    n_plus = [a for a in g.atoms if a.z == 7][0]
    assert n_plus.charge == 1
    with pytest.raises(cc.ValenceError):
        cc.parse_psmiles("[*]CN(C)(C)C[*]")         # neutral N, 4 bonds


# ------------------------------------------------------------ substitution

def test_substitute_terminus_astatine():
    g = cc.parse_psmiles("[*]CC[*]")
    s = cc.substitute_terminus(g)
    assert [s.atoms[i].z for i in s.terminus_atoms] == [85, 85]
    others = [a.z for i, a in enumerate(s.atoms)
              if i not in s.terminus_atoms]
    assert others == [6, 6]


def test_substitute_terminus_idempotent():
    g = cc.substitute_terminus(cc.parse_psmiles("[*]CC[*]"))
    again = cc.substitute_terminus(g)
    assert again is g


def test_substitute_terminus_zero_wildcards():
    bare = cc.PolymerGraph(atoms=[cc.Atom(z=6), cc.Atom(z=6)],
                           bonds=[cc.Bond(u=0, v=1, order=1)])
    with pytest.raises(cc.WildcardCountError):
        cc.substitute_terminus(bare)


# -------------------------------------------------------------- tokenizer

def test_vocabulary_has_265_tokens(vocab):
    assert len(vocab) == 265


def test_tokenize_simple(vocab):
    seq = cc.tokenize("[*]CC[*]", vocab)
    assert len(seq) == 4
    assert [vocab.tokens[i] for i in seq.ids] == ["[*]", "C", "C", "[*]"]


def test_tokenize_chlorine_single_token(vocab):
    seq = cc.tokenize("Cl", vocab)
    assert len(seq) == 1
    assert vocab.tokens[seq.ids[0]] == "Cl"


def test_tokenize_empty_raises(vocab):
    with pytest.raises(cc.UnknownTokenError):
        cc.tokenize("", vocab)


def test_tokenize_unknown_has_position(vocab):
    with pytest.raises(cc.UnknownTokenError) as err:
        cc.tokenize("CC~C", vocab)
    assert err.value.position == 2


def test_roundtrip_corpus(vocab):
    for text in cc.synthesize_corpus(40, seed=3):
        seq = cc.tokenize(text, vocab)
        assert cc.detokenize(seq, vocab) == text.strip()


# -------------------------------------------------------------- conformer

def test_two_atom_rest_length():
    g = cc.parse_psmiles("[*]C[*]")
    sub = cc.substitute_terminus(g)
    conf = cc.embed_conformer(sub, seed=0)
    d = conf.distances()
    for b in sub.bonds:
        assert abs(d[b.u, b.v] - 1.5) < 1e-9


def test_conformer_deterministic():
    g = cc.substitute_terminus(cc.parse_psmiles("[*]CC(C)CC(=O)OC[*]"))
    a = cc.embed_conformer(g, seed=12)
    b = cc.embed_conformer(g, seed=12)
    assert np.array_equal(a.coords, b.coords)


def test_conformer_min_separation_branched():
    text = "[*]CC(CC(C)(C)CC)CC(CC)C(C)CC[*]"
    g = cc.substitute_terminus(cc.parse_psmiles(text))
    assert len(g.atoms) >= 18
    conf = cc.embed_conformer(g, seed=4)
    d = conf.distances()
    np.fill_diagonal(d, np.inf)
    assert d.min() > 0.5


def test_conformer_sidecar_roundtrip(tmp_path):
    g = cc.substitute_terminus(cc.parse_psmiles("[*]CCO[*]"))
    conf = cc.embed_conformer(g, seed=1)
    path = tmp_path / "side.tsv"
    cc.save_conformer_sidecar(path, {0: conf})
    loaded = cc.load_conformer_sidecar(path)
    assert np.array_equal(loaded[0].coords, conf.coords)


# ------------------------------------------------------------- fingerprint

def test_ecfp_deterministic():
    g = cc.substitute_terminus(cc.parse_psmiles("[*]OC(=O)C[*]"))
    a = cc.compute_ecfp(g)
    b = cc.compute_ecfp(g)
    assert np.array_equal(a.bits, b.bits)
    assert a.nbits == 2048 and a.radius == 3


def test_ecfp_differs_between_polymers():
    g1 = cc.substitute_terminus(cc.parse_psmiles("[*]CC[*]"))
    g2 = cc.substitute_terminus(cc.parse_psmiles("[*]CCC[*]"))
    t = cc.tanimoto(cc.compute_ecfp(g1), cc.compute_ecfp(g2))
    assert t < 1.0


def test_ecfp_radius_zero_single_heavy_atom():
    g = cc.parse_psmiles("[*]C[*]")
    from polylab.chemcore.fingerprint import neighborhood_identifiers

    idents = neighborhood_identifiers(g, 0)
    # one wildcard environment (both termini identical) + one carbon
    assert len(idents) == 2


def test_ecfp_folding_consistency():
    g = cc.substitute_terminus(
        cc.parse_psmiles("[*]CC(c1ccccc1)C(=O)OC[*]"))
    wide = cc.compute_ecfp(g, nbits=4096)
    narrow = cc.compute_ecfp(g, nbits=2048)
    folded = set(int(i) % 2048 for i in wide.on_bits())
    assert folded == set(int(i) for i in narrow.on_bits())


def test_tanimoto_hand_case():
    a = np.zeros(16, dtype=np.uint8)
    b = np.zeros(16, dtype=np.uint8)
    a[[1, 2, 3]] = 1
    b[[2, 3, 4]] = 1
    fa = cc.Fingerprint(bits=a, radius=3)
    fb = cc.Fingerprint(bits=b, radius=3)
    assert cc.tanimoto(fa, fb) == 0.5
    assert cc.tanimoto(fa, fa) == 1.0


def test_tanimoto_disjoint_and_empty():
    a = np.zeros(8, dtype=np.uint8)
    b = np.zeros(8, dtype=np.uint8)
    a[0] = 1
    b[1] = 1
    assert cc.tanimoto(cc.Fingerprint(a, 3), cc.Fingerprint(b, 3)) == 0.0
    z = cc.Fingerprint(np.zeros(8, dtype=np.uint8), 3)
    assert cc.tanimoto(z, z) == 1.0


def test_tanimoto_length_mismatch():
    a = cc.Fingerprint(np.zeros(8, dtype=np.uint8), 3)
    b = cc.Fingerprint(np.zeros(16, dtype=np.uint8), 3)
    with pytest.raises(cc.LengthMismatchError):
        cc.tanimoto(a, b)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.booleans(), min_size=8, max_size=8),
       st.lists(st.booleans(), min_size=8, max_size=8))
def test_tanimoto_properties(bits_a, bits_b):
    fa = cc.Fingerprint(np.array(bits_a, dtype=np.uint8), 3)
    fb = cc.Fingerprint(np.array(bits_b, dtype=np.uint8), 3)
    t_ab = cc.tanimoto(fa, fb)
    assert 0.0 <= t_ab <= 1.0
    assert t_ab == cc.tanimoto(fb, fa)
    if any(bits_a):
        assert cc.tanimoto(fa, fa) == 1.0


# ---------------------------------------------------------- canonical key

def test_canonical_key_roundtrip():
    for text in ["[*]CC[*]", "[*]OC(=O)C[*]", "[*]CC(c1ccccc1)C[*]"]:
        g = cc.parse_psmiles(text)
        key = cc.canonical_key(g)
        reparsed = cc.parse_psmiles(cc.to_psmiles(g))
        assert cc.canonical_key(reparsed) == key


def test_canonical_key_permutation_invariant():
    g = cc.parse_psmiles("[*]OC(=O)CC[*]")
    key = cc.canonical_key(g)
    rng = np.random.default_rng(9)
    for _ in range(10):
        perm = rng.permutation(len(g.atoms))
        assert cc.canonical_key(permute_graph(g, perm)) == key


def test_canonical_key_ring_permutation():
    g = cc.parse_psmiles("[*]CC(c1ccc(O)cc1)C[*]")
    key = cc.canonical_key(g)
    rng = np.random.default_rng(3)
    for _ in range(6):
        perm = rng.permutation(len(g.atoms))
        assert cc.canonical_key(permute_graph(g, perm)) == key


def test_canonical_key_distinguishes():
    k1 = cc.canonical_key(cc.parse_psmiles("[*]CC[*]"))
    k2 = cc.canonical_key(cc.parse_psmiles("[*]CCC[*]"))
    assert k1 != k2


# ----------------------------------------------------------------- dataset

def test_dataset_roundtrip(tmp_path):
    path = tmp_path / "data.tsv"
    path.write_text("[*]CC[*]\ty=1.5;z=2.0\n[*]OC[*]\n")
    records = cc.load_dataset(path)
    assert records[0].properties == {"y": 1.5, "z": 2.0}
    assert records[1].properties == {}
    errors = cc.validate_dataset(path)
    assert errors == []


def test_dataset_validation_reports_line(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("[*]CC[*]\n[*]C(C)(C)(C)(C)C[*]\nnot smiles\n")
    errors = cc.validate_dataset(path)
    lines = [ln for ln, _ in errors]
    assert lines == [2, 3]
