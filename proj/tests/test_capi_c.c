/* Compiled as C to guarantee the public header stays C-clean. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "invgap/invgap.h"

static int fail(const char* what) {
    fprintf(stderr, "FAIL: %s (%s)\n", what, ig_last_error());
    return 1;
}

int main(void) {
    double y[10];
    double m[6], lambda[6];
    double gap = -1.0;
    double bound = 0.0;
    int64_t i;
    ig_model* model = NULL;

    for (i = 0; i < 10; ++i) y[i] = 1.0;
    if (ig_model_create(6, NULL, y, 10, 0.058549831524319168, NULL, NULL, 1.0, &model) !=
        IG_OK) {
        return fail("model create");
    }
    if (ig_model_theta_mix_star(model, m, lambda) != IG_OK) return fail("theta_mix_star");
    if (ig_model_invariance_gap(model, m, lambda, &gap) != IG_OK) return fail("gap");
    /* gap = 2.076... * (K - 1) under these settings */
    if (fabs(gap - 5.0 * 2.0760604853120741) > 1e-9) return fail("gap value");
    if (ig_model_data_related_bound(model, &bound) != IG_OK) return fail("bound");
    if (fabs(bound - 170.79468445347132) > 1e-9) return fail("bound value");
    ig_model_free(model);

    if (ig_model_create(0, NULL, y, 10, 1.0, NULL, NULL, 1.0, &model) !=
        IG_ERROR_INVALID_ARGUMENT) {
        return fail("error code for invalid k");
    }
    if (strlen(ig_last_error()) == 0) return fail("error message");
    return 0;
}
