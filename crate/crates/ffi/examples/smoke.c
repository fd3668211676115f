/* cc -Icrates/ffi/include crates/ffi/examples/smoke.c target/release/liblinsync_ffi.a -lm -lpthread -ldl */
#include <stdio.h>
#include <stdlib.h>
#include "linsync.h"

int main(void) {
    LcExperiment *exp = NULL;
    if (lc_experiment_builtin(&exp) != LC_STATUS_OK) {
        char msg[256];
        lc_last_error(msg, sizeof msg);
        fprintf(stderr, "error: %s\n", msg);
        return 1;
    }
    LcTrajectory *tr = NULL;
    if (lc_experiment_simulate(exp, LC_ENGINE_MODAL, &tr) != LC_STATUS_OK) {
        lc_experiment_free(exp);
        return 1;
    }
    size_t n = lc_trajectory_len(tr);
    double *e = malloc(n * sizeof *e);
    lc_trajectory_error(tr, e, n);
    printf("linsync %s: e(0)=%g e(T)=%g over %zu samples\n", lc_version(), e[0], e[n - 1], n);
    free(e);
    lc_trajectory_free(tr);
    lc_experiment_free(exp);
    return 0;
}
