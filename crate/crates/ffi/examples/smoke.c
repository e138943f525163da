/* cc -Icrates/ffi/include crates/ffi/examples/smoke.c \
 *    target/release/librobust_diff_ffi.a -lpthread -ldl -lm -o smoke */
#include <math.h>
#include <stdio.h>

#include "robust_diff.h"

int main(void) {
    double l1, l2;
    if (rd_tune_super_twisting(2.0, 1.5, 1.1, &l1, &l2) != RD_STATUS_OK) {
        fprintf(stderr, "%s\n", rd_last_error_message());
        return 1;
    }
    printf("version %s\nlambda1 %.6f lambda2 %.6f\n", rd_version(), l1, l2);

    RdPeakingConstants c;
    if (rd_peaking_constants(2.0, 1.0, 1e-8, 1e6, &c) != RD_STATUS_OK) {
        fprintf(stderr, "%s\n", rd_last_error_message());
        return 1;
    }
    double eps;
    rd_optimal_eps_gain(c.p, c.q, 1.0, 0.04, &eps);
    printf("P %.6f Q %.6f eps* %.6f\n", c.p, c.q, eps);

    RdHighGain *hg = rd_hg_new(2.0, 1.0, eps, RD_METHOD_RK4, 0.0);
    const double dt = 1e-4;
    double est = 0.0;
    int stiff = 0;
    for (int k = 0; k < 100000; ++k) {
        double t = k * dt;
        rd_hg_update(hg, sin(t), sin(t + dt / 2), sin(t + dt), dt, &est, &stiff);
    }
    printf("estimate %.4f truth %.4f\n", est, cos(100000 * dt));
    rd_hg_free(hg);

    if (rd_st_new(-1.0, 1.0, 0.0) == NULL) {
        printf("rejected: %s\n", rd_last_error_message());
    }
    return 0;
}
