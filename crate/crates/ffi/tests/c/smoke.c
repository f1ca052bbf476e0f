#include <math.h>
#include <stdio.h>
#include <string.h>

#include "rcg.h"

#define CHECK(cond)                                                    \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,    \
                    #cond, rcg_last_error_message());                  \
            return 1;                                                  \
        }                                                              \
    } while (0)

int main(int argc, char **argv) {
    CHECK(argc == 2);
    RcgDataset *ds = NULL;
    CHECK(rcg_dataset_load_csv(argv[1], "class", &ds) == RCG_STATUS_OK);
    CHECK(rcg_dataset_rows(ds) == 150 && rcg_dataset_features(ds) == 4 && rcg_dataset_classes(ds) == 3);

    RcgConfig cfg = rcg_config_default();
    CHECK(cfg.k == 5 && !cfg.use_epsilon);
    RcgReduction *red = NULL;
    CHECK(rcg_reduce(ds, RCG_ALGORITHM_PSRCG, &cfg, &red) == RCG_STATUS_OK);
    uint8_t rows[150];
    CHECK(rcg_reduction_instance_mask(red, rows, 150) == RCG_STATUS_OK);
    size_t kept = 0;
    for (int i = 0; i < 150; i++) kept += rows[i];
    CHECK(kept == rcg_reduction_kept_instances(red) && kept > 0 && kept < 150);
    CHECK(rcg_reduction_instance_mask(red, rows, 149) == RCG_STATUS_USAGE);
    double rcg = 0;
    CHECK(rcg_reduction_final_rcg(red, &rcg) == RCG_STATUS_OK && rcg <= 1.0);
    rcg_reduction_free(red);

    RcgDataset *missing = NULL;
    CHECK(rcg_dataset_load_csv(argv[1], "label", &missing) == RCG_STATUS_DATA && missing == NULL);
    CHECK(strstr(rcg_last_error_message(), "label") != NULL);

    double q = 0;
    CHECK(rcg_chi_square_quantile(0.95, 1.0, &q) == RCG_STATUS_OK && fabs(q - 3.841458820694124) < 1e-6);
    printf("ok %s\n", rcg_version());
    rcg_dataset_free(ds);
    return 0;
}
