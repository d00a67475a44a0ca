/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "mfld/mfld.h"

static int failures = 0;

#define EXPECT(cond)                                                        \
    do {                                                                    \
        if (!(cond)) {                                                      \
            fprintf(stderr, "%s:%d: failed: %s (%s)\n", __FILE__, __LINE__, \
                    #cond, mfld_last_error());                              \
            ++failures;                                                     \
        }                                                                   \
    } while (0)

static int close_to(double a, double b, double tol) { return fabs(a - b) <= tol; }

int main(void) {
    mfld_measure *u = NULL, *t = NULL, *pm = NULL, *bad = NULL;
    double theta[3] = {0.5, -1.0, 0.0};
    double probs[8], g[3], c[3], h[9], kl = -1, w1 = -1, s1 = -1;
    double logd[8] = {0, -INFINITY, -INFINITY, -INFINITY, -INFINITY, -INFINITY, -INFINITY, -INFINITY};
    double draw[3] = {0.9, 0.9, 0.9};
    uint32_t y = 99;
    int n = 0;
    char* out = NULL;

    EXPECT(strcmp(mfld_version(), "0.1.0") == 0);
    EXPECT(mfld_measure_uniform(3, &u) == MFLD_OK);
    EXPECT(mfld_measure_dim(u, &n) == MFLD_OK && n == 3);
    EXPECT(mfld_measure_tilt(u, theta, &t) == MFLD_OK);
    EXPECT(mfld_measure_probabilities(t, probs) == MFLD_OK);
    EXPECT(close_to(probs[1], 0.5 * (1 + tanh(0.5)) * 0.5 * (1 - tanh(-1.0)) * 0.5, 1e-14));
    EXPECT(mfld_measure_g(t, 5, g) == MFLD_OK);
    EXPECT(close_to(g[0], tanh(0.5), 1e-14) && close_to(g[1], tanh(-1.0), 1e-14) && g[2] == 0.0);
    EXPECT(mfld_measure_center(t, c) == MFLD_OK && close_to(c[1], tanh(-1.0), 1e-14));
    EXPECT(mfld_measure_h_matrix(t, h) == MFLD_OK && fabs(h[0]) < 1e-14);
    EXPECT(mfld_measure_kl(u, u, &kl) == MFLD_OK && fabs(kl) < 1e-15);

    /* point mass at vertex 0 against uniform: KL = 3 log 2, W1 = 3/2 */
    EXPECT(mfld_measure_from_log_density(3, logd, &pm) == MFLD_OK);
    EXPECT(mfld_measure_kl(pm, u, &kl) == MFLD_OK && close_to(kl, 3 * log(2.0), 1e-14));
    EXPECT(mfld_measure_w1(pm, u, &w1) == MFLD_OK && close_to(w1, 1.5, 1e-9));
    EXPECT(mfld_measure_step1_bound(pm, &s1) == MFLD_OK && s1 == 0.0);
    EXPECT(mfld_measure_sample(pm, draw, &y) == MFLD_OK && y == 0);
    EXPECT(mfld_measure_to_json(pm, &out) == MFLD_OK && strstr(out, "null") != NULL);
    mfld_string_free(out);
    out = NULL;

    /* errors map to status codes and leave a message */
    EXPECT(mfld_measure_uniform(0, &bad) == MFLD_E_INVALID_ARGUMENT && bad == NULL);
    EXPECT(strlen(mfld_last_error()) > 0);
    EXPECT(mfld_measure_uniform(40, &bad) != MFLD_OK);
    EXPECT(mfld_measure_from_json("{not json", &bad) == MFLD_E_INVALID_ARGUMENT);
    EXPECT(mfld_measure_dim(NULL, &n) == MFLD_E_INVALID_ARGUMENT);
    EXPECT(mfld_set_threads(-1) == MFLD_E_INVALID_ARGUMENT);

    /* generic entry point */
    EXPECT(mfld_run("verify", "{\"module\": \"cube_core\", \"seed\": 1}", &out) == MFLD_OK);
    EXPECT(out != NULL && strstr(out, "\"passed\":true") != NULL);
    mfld_string_free(out);
    out = NULL;
    EXPECT(mfld_run("transport.w1",
                    "{\"a\": {\"n\": 1, \"values\": [0, null]}, \"b\": {\"n\": 1, \"values\": [null, 0]}}", &out) == MFLD_OK);
    EXPECT(out != NULL && strstr(out, "\"w1\":") != NULL);
    mfld_string_free(out);
    out = NULL;
    EXPECT(mfld_run("complexity", "{\"model\": \"triangle\", \"N\": 4, \"samples\": 100}", &out) == MFLD_E_INVALID_ARGUMENT);
    EXPECT(out == NULL);
    EXPECT(mfld_run("no.such.command", "{}", &out) == MFLD_E_INVALID_ARGUMENT);
    EXPECT(mfld_run("ld.bound", "{\"phi\": 1, \"lip\": 1, \"complexity\": 1, \"n\": 10, \"p\": 0.5, \"t\": 0.1, \"delta\": -1}",
                    &out) != MFLD_OK);

    mfld_measure_free(u);
    mfld_measure_free(t);
    mfld_measure_free(pm);
    mfld_measure_free(NULL);
    if (failures) fprintf(stderr, "%d failure(s)\n", failures);
    else printf("C API: all checks passed\n");
    return failures ? 1 : 0;
}
