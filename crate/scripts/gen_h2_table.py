import numpy as np
from pyscf import gto, scf, ao2mo
from openfermion import InteractionOperator, get_fermion_operator, bravyi_kitaev, count_qubits
from openfermion.chem.molecular_data import spinorb_from_spatial

def h2_terms(r):
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {r}", basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol); mf.conv_tol = 1e-12; mf.kernel()
    C = mf.mo_coeff
    h1 = C.T @ mf.get_hcore() @ C
    eri = ao2mo.restore(1, ao2mo.kernel(mol, C), C.shape[1])
    # openfermion convention: two_body[p,q,r,s] a†p a†q a_r a_s with (ps|qr) chemist
    tb = np.asarray(eri.transpose(0, 2, 3, 1), order="C")
    one, two = spinorb_from_spatial(h1, tb)
    op = InteractionOperator(mol.energy_nuc(), one, 0.5 * two)
    q = bravyi_kitaev(get_fermion_operator(op))
    q.compress(1e-14)
    return {tuple(t): c.real for t, c in q.terms.items()}, mf.e_tot

pattern = {
 (): 0,
 ((0,'Z'),): 1, ((1,'Z'),): 2, ((2,'Z'),): 3, ((0,'Z'),(1,'Z')): 1,
 ((0,'Z'),(2,'Z')): 4, ((1,'Z'),(3,'Z')): 5, ((0,'X'),(1,'Z'),(2,'X')): 6,
 ((0,'Y'),(1,'Z'),(2,'Y')): 6, ((0,'Z'),(1,'Z'),(2,'Z')): 7,
 ((0,'Z'),(2,'Z'),(3,'Z')): 4, ((1,'Z'),(2,'Z'),(3,'Z')): 3,
 ((0,'X'),(1,'Z'),(2,'X'),(3,'Z')): 6, ((0,'Y'),(1,'Z'),(2,'Y'),(3,'Z')): 6,
 ((0,'Z'),(1,'Z'),(2,'Z'),(3,'Z')): 7,
}
import sys
from pathlib import Path
from openfermion import get_sparse_operator, QubitOperator

# Regenerates crates/core/data/h2_sto3g_bk.csv: STO-3G H2, RHF orbitals,
# Bravyi-Kitaev mapping, collapsed onto the eight shared coefficients f0..f7.
rows = sorted(set([round(0.3 + 0.1*i, 2) for i in range(19)] + [0.74]))
out = ["bond_length,f0,f1,f2,f3,f4,f5,f6,f7"]
for r in rows:
    terms, _ = h2_terms(r)
    assert set(terms) == set(pattern)
    f = [None]*8
    for t, c in terms.items():
        j = pattern[t]
        if f[j] is None: f[j] = c
        else: assert abs(f[j]-c) < 1e-10, (r, t)
    H = sum((QubitOperator(t, c) for t, c in terms.items()), QubitOperator())
    ev = np.linalg.eigvalsh(get_sparse_operator(H, 4).toarray())[0]
    print(f"{r:.2f} ground energy {ev:.8f}", file=sys.stderr)
    out.append(",".join([f"{r:.2f}"] + [f"{x:.12f}" for x in f]))
dest = Path(__file__).resolve().parent.parent / "crates/core/data/h2_sto3g_bk.csv"
dest.write_text("\n".join(out) + "\n")
