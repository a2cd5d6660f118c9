/* Hand-written reference for jacobi.py, linked against the runtime only for
 * the host channel, timing and number formatting. */
#include "oly_rt.h"

#ifndef NX
#define NX 100
#endif
#ifndef MAX_ITERS
#define MAX_ITERS 10000
#endif
#ifndef REPORT
#define REPORT 1000
#endif

static double u[NX + 2], unew[NX + 2], f[NX + 2];

int main(void)
{
    Env env = rt_init(1, 1u << 12, 1u << 12, 0, 0);
    double h2 = 1.0 / ((double)(NX + 1) * (NX + 1));
    for (int i = 0; i < NX + 2; i++) {
        u[i] = 0.0;
        unew[i] = 0.0;
        f[i] = 1.0;
    }
    u[0] = 1.0;
    unew[0] = 1.0;
    double r = 0.0;
    for (long k = 1; k <= MAX_ITERS; k++) {
        r = 0.0;
        for (int i = 1; i <= NX; i++)
            unew[i] = 0.5 * (u[i - 1] + u[i + 1] + h2 * f[i]);
        for (int i = 1; i <= NX; i++) {
            double d = unew[i] - u[i];
            r = r + d * d;
            u[i] = unew[i];
        }
        if (k % REPORT == 0) {
            oly_print_int(env, k);
            oly_print_sep(env);
            oly_print_real(env, r);
            oly_print_nl(env);
        }
    }
    oly_print_str(env, "residual");
    oly_print_sep(env);
    oly_print_real(env, r);
    oly_print_nl(env);
    return rt_finish(env);
}
