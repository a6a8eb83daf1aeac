"""Independent reference values for the frozen constants in the unit tests.

Uses scipy's general-purpose logm/expm/funm and a Lyapunov solver, none of
which share code with the library. Run with `python3 gen_oracles.py`.
"""
import numpy as np
from scipy.linalg import expm, logm, solve_continuous_lyapunov, funm

np.set_printoptions(precision=17)


def show(name, value):
    if np.iscomplexobj(value):
        value = np.asarray(value)
        print(f"{name} (re) =", np.real(value).tolist())
        print(f"{name} (im) =", np.imag(value).tolist())
    else:
        print(f"{name} =", np.asarray(value).tolist())


def lindblad_pieces(h, ls, hbar):
    def lu(o):
        return (h @ o - o @ h) / (1j * hbar)

    def lnu(o):
        out = np.zeros_like(o)
        for l in ls:
            ld = l.conj().T
            out += 2 * l @ o @ ld - ld @ l @ o - o @ ld @ l
        return out / (2 * hbar)

    def l1(o):
        out = np.zeros_like(o)
        for l in ls:
            a = (l + l.conj().T) / 2
            b = (l - l.conj().T) / 2j
            for x in (a, b):
                out += x @ (x @ o - o @ x) - (x @ o - o @ x) @ x
        return -out / (2 * hbar)

    def l2(o):
        c = sum(l @ l.conj().T - l.conj().T @ l for l in ls)
        return (c @ o + o @ c) / (4 * hbar)

    def l3(o):
        return sum(l @ o @ l.conj().T - l.conj().T @ o @ l for l in ls) / (2 * hbar)

    return lu, lnu, l1, l2, l3


def finite_case():
    hbar = 1.0
    h = np.array([[1.0, 0.3 - 0.2j], [0.3 + 0.2j, -0.5]])
    l = np.array([[0.2, 0.5], [0.1j, -0.3]])
    rho = np.array([[0.6, 0.1 + 0.15j], [0.1 - 0.15j, 0.4]])
    lu, lnu, l1, l2, l3 = lindblad_pieces(h, [l], hbar)
    lr = logm(rho)
    delta = -np.trace(rho @ l1(lr)).real
    psi = np.trace(rho @ (l2(lr) - l3(lr))).real
    rate = -np.trace((lu(rho) + lnu(rho)) @ lr).real
    show("finite.delta", delta)
    show("finite.psi", psi)
    show("finite.rate", rate)
    d = 2
    eye = np.eye(d)
    sup = np.zeros((4, 4), complex)
    for k in range(4):
        e = np.zeros(4, complex)
        e[k] = 1
        o = e.reshape(d, d, order="F")
        sup[:, k] = (lu(o) + lnu(o)).reshape(-1, order="F")
    rho_t = (expm(0.7 * sup) @ rho.reshape(-1, order="F")).reshape(d, d, order="F")
    show("finite.rho_t07", rho_t)


def dephasing_case():
    # L = sz on rho = 1/2 + sx / 4, Delta = -Tr(rho L1[ln rho]) via logm.
    sz = np.diag([1.0, -1.0]).astype(complex)
    sx = np.array([[0, 1], [1, 0]], complex)
    rho = 0.5 * np.eye(2) + 0.25 * sx
    _, _, l1, _, _ = lindblad_pieces(np.zeros((2, 2)), [sz], 1.0)
    show("dephasing.delta", -np.trace(rho @ l1(logm(rho))).real)


def gaussian_case(hbar):
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    b = np.array([[1.2, 0.3], [0.3, 0.8]])
    l = np.array([0.4 + 0.3j, -0.2 + 0.5j])
    gamma = np.outer(l, l.conj())
    d = hbar * gamma.real
    c = gamma.imag
    a = j @ b - c @ j
    v = np.array([[1.3, 0.2], [0.2, 0.9]])
    m = 2j * v @ j
    arccoth = funm(m, lambda z: 0.5 * np.log((z + 1) / (z - 1)))
    u = (2j * j @ arccoth).real
    delta = 0.5 * np.trace(d @ u) / hbar
    psi = np.trace(j @ c @ u @ v)
    nu = np.sqrt(np.linalg.det(v))
    s = (nu + 0.5) * np.log(nu + 0.5) - (nu - 0.5) * np.log(nu - 0.5)
    vs = solve_continuous_lyapunov(a, -d / hbar)
    print(f"-- hbar = {hbar}")
    show("gauss.u", u)
    show("gauss.delta", delta)
    show("gauss.psi", psi)
    show("gauss.entropy", s)
    show("gauss.stationary_v", vs)
    show("gauss.shannon_rate", 0.5 * np.trace(d @ np.linalg.inv(v)) / hbar - np.trace(j @ c))


finite_case()
dephasing_case()
gaussian_case(1.0)
gaussian_case(0.7)
