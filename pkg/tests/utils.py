import numpy as np

from src.group_core import Family, Z2Set, Z4Set, digits4, from_digits4


def add_digits(x, y, n):
    return from_digits4([(a + b) % 4 for a, b in zip(digits4(x, n), digits4(y, n))])


def pairing4(r, x, n):
    return sum(a * b for a, b in zip(digits4(r, n), digits4(x, n))) % 4


def dft4_direct(A: Z4Set):
    """
    Numerators (re, im) of 4^n * \\hat1_A(r) from the definition: counting the x in A by
    the value of r.x mod 4 and using i^{-j} = 1, -i, -1, i.
    """
    n = A.ambient_n
    re, im = [], []
    for r in range(4**n):
        c = [0, 0, 0, 0]
        for x in A.members:
            c[pairing4(r, x, n)] += 1
        re.append(c[0] - c[2])
        im.append(c[3] - c[1])
    return re, im


def wht_direct(values, m):
    """sum_x values[x] (-1)^{g.x} for every g."""
    return [
        sum(int(v) * (-1) ** bin(g & x).count("1") for x, v in enumerate(values))
        for g in range(2**m)
    ]


def progression_pairs(A: Z4Set):
    """#{(x, d) : x, x+d, x+2d in A}, with the additions done digit by digit."""
    n = A.ambient_n
    members = set(A.members)
    total = 0
    for x in A.members:
        for d in range(4**n):
            y = add_digits(x, d, n)
            if y in members and add_digits(y, d, n) in members:
                total += 1
    return total


def proper_progression_exists(A: Z4Set):
    n = A.ambient_n
    members = set(A.members)
    for x in A.members:
        for d in range(4**n):
            if add_digits(d, d, n) == 0:
                continue
            y = add_digits(x, d, n)
            if y in members and add_digits(y, d, n) in members:
                return True
    return False


def family_quadruples(F: Family):
    """#{(a, a', y, h) : a, a' in A_h, y in A_{h+a+a'}} by four nested loops."""
    total = 0
    for h in range(F.group_order):
        for a in F.fibre(h).members:
            for b in F.fibre(h).members:
                total += F.fibre(h ^ a ^ b).size
    return total


def coset_average(values, members):
    return sum(values[int(x)] for x in members) / len(members)


def random_z4_set(n, size, seed=0):
    rng = np.random.default_rng(seed)
    return Z4Set(n, rng.choice(4**n, size=size, replace=False).tolist())


def random_z2_set(m, p=0.5, seed=0):
    rng = np.random.default_rng(seed)
    return Z2Set(m, np.flatnonzero(rng.random(2**m) < p).tolist())


def random_family(m, p=0.5, seed=0):
    rng = np.random.default_rng(seed)
    fibres = [np.flatnonzero(rng.random(2**m) < p).tolist() for _ in range(2**m)]
    return Family(m, fibres)
