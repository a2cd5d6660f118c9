# Jacobi relaxation for -u'' = 1 on (0, 1) with u(0) = 1 and u(1) = 0.
NX = 100
MAX_ITERS = 10000
REPORT = 1000

u = [0.0] * (NX + 2)
unew = [0.0] * (NX + 2)
f = [1.0] * (NX + 2)
h2 = 1.0 / ((NX + 1) * (NX + 1))
u[0] = 1.0
unew[0] = 1.0


def relax(i):
    unew[i] = 0.5 * (u[i - 1] + u[i + 1] + h2 * f[i])


def delta(i):
    return unew[i] - u[i]


def sweep():
    r = 0.0
    for i in range(1, NX + 1):
        relax(i)
    for i in range(1, NX + 1):
        d = delta(i)
        r = r + d * d
        u[i] = unew[i]
    return r


def solve():
    k = 0
    r = 0.0
    while k < MAX_ITERS:
        r = sweep()
        k = k + 1
        if k % REPORT == 0:
            print(k, r)
    print("residual", r)


solve()
