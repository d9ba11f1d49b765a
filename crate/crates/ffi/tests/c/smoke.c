/* Drives the C ABI end to end: solitary wave in, one time unit of transport,
 * reconstruction out. Prints the sup error of h and exits non-zero on failure. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "gnflow.h"

#define N 512

static int check(GnflowStatus st, const char *what) {
    if (st != GNFLOW_STATUS_OK) {
        char msg[256];
        gnflow_last_error_message(msg, sizeof msg);
        fprintf(stderr, "%s failed with status %d: %s\n", what, (int)st, msg);
        return 1;
    }
    return 0;
}

int main(void) {
    static double h[N], u[N], hr[N], ur[N], he[N], ue[N];
    const double length = 80.0;
    GnflowSolver *solver = NULL;
    GnflowDiagnostics d;
    double t = 0.0, err = 0.0;

    if (check(gnflow_solitary_wave(length, N, 0.2, 0.0, h, u), "solitary_wave")) return 1;
    if (check(gnflow_solver_new(length, N, h, u, &solver), "solver_new")) return 1;
    if (check(gnflow_solver_step(solver, 0.05, 20), "solver_step")) return 1;
    if (check(gnflow_solver_time(solver, &t), "solver_time")) return 1;
    if (check(gnflow_solver_reconstruct(solver, N, hr, ur), "solver_reconstruct")) return 1;
    if (check(gnflow_solver_diagnostics(solver, 1.0, &d), "solver_diagnostics")) return 1;
    if (check(gnflow_solitary_wave(length, N, 0.2, t, he, ue), "solitary_wave")) return 1;
    for (int j = 0; j < N; j++) {
        double e = fabs(hr[j] - he[j]);
        if (e > err) err = e;
    }
    gnflow_solver_free(solver);

    /* error path: a non-positive height is rejected with a message */
    h[0] = -1.0;
    if (gnflow_solve_ah(length, N, h, u, ur) != GNFLOW_STATUS_ILL_POSED) return 2;
    if (gnflow_last_error_message(NULL, 0) == 0) return 3;

    printf("gnflow %s: t = %.3f, sup |h - h_exact| = %.3e, min phi_x = %.4f\n", gnflow_version(), t, err, d.min_phix);
    return err < 1e-3 ? 0 : 4;
}
