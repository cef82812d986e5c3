/* Minimal consumer of the C API: free tumbling propagation plus a solver
 * round trip. Exits nonzero on the first unexpected status. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "attsim.h"

static int check(AttsimStatus status, const char *what) {
    if (status != ATTSIM_STATUS_OK) {
        fprintf(stderr, "%s failed: %d (%s)\n", what, (int)status,
                attsim_last_error_message());
        return 1;
    }
    return 0;
}

int main(void) {
    AttsimBody *body = NULL;
    if (check(attsim_body_new_principal(2.5, 2.0, 1.5, &body), "body_new"))
        return 1;

    /* Solver options round trip. */
    AttsimSolverOptions opts;
    if (check(attsim_solver_options_default(&opts), "options_default"))
        return 1;
    if (opts.max_iters != 50)
        return 2;

    /* One implicit solve. */
    double pi0[3] = {2.5, 4.0, 4.5};
    AttsimSolveResult result;
    if (check(attsim_solve(body, 0.01, pi0, &opts, &result), "solve"))
        return 1;
    if (result.iterations > 10 || result.residual_norm > 1e-12)
        return 3;

    /* Free tumbling for 1000 steps; |pi| must be conserved. */
    double r0[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    AttsimTrajectory *traj = NULL;
    if (check(attsim_propagate(body, r0, pi0, 0.01, 1000, NULL, NULL, &traj),
              "propagate"))
        return 1;
    if (attsim_trajectory_len(traj) != 1001)
        return 4;

    double t, r[9], pi[3];
    if (check(attsim_trajectory_sample(traj, 1000, &t, r, pi), "sample"))
        return 1;
    double n0 = sqrt(pi0[0] * pi0[0] + pi0[1] * pi0[1] + pi0[2] * pi0[2]);
    double n1 = sqrt(pi[0] * pi[0] + pi[1] * pi[1] + pi[2] * pi[2]);
    if (fabs(n1 - n0) > 1e-12 * n0)
        return 5;

    /* Orthogonality defect of the final raw matrix. */
    double defect = 0.0;
    for (int i = 0; i < 3; i++) {
        for (int j = 0; j < 3; j++) {
            double dot = 0.0;
            for (int k = 0; k < 3; k++)
                dot += r[3 * k + i] * r[3 * k + j];
            double target = (i == j) ? 1.0 : 0.0;
            defect += (dot - target) * (dot - target);
        }
    }
    if (sqrt(defect) > 1e-11)
        return 6;

    attsim_trajectory_free(traj);
    attsim_body_free(body);

    /* Null handles are tolerated by the free functions. */
    attsim_trajectory_free(NULL);
    attsim_body_free(NULL);

    puts("attsim C demo: ok");
    return 0;
}
