#include <stdio.h>
#include <string.h>

#include "degnn.h"

#define CHECK(call)                                                              \
    do {                                                                         \
        DegnnStatus s_ = (call);                                                 \
        if (s_ != DEGNN_STATUS_OK) {                                             \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,                    \
                    degnn_last_error_message());                                 \
            return 1;                                                            \
        }                                                                        \
    } while (0)

int main(void) {
    /* 4-cycle 0-1-2-3-0 */
    uint64_t src[] = {0, 1, 2, 3};
    uint64_t dst[] = {1, 2, 3, 0};
    DegnnGraph *g = NULL;
    CHECK(degnn_graph_from_edges(src, dst, 4, 4, &g));

    uint64_t m = 0;
    CHECK(degnn_graph_num_edges(g, &m));

    double spd[4 * 4];
    size_t cols = 0;
    CHECK(degnn_spd_encoding(g, 0, 2, spd, 16, &cols));

    double rw[4 * 2];
    CHECK(degnn_rw_encoding(g, 0, 2, rw, 8, &cols));

    uint64_t labels[] = {0, 1, 0, 1};
    double h = -1.0;
    CHECK(degnn_homophily(g, labels, 4, 2, &h));

    DegnnStatus bad = degnn_graph_degree(g, 9, &m);
    int ok = bad == DEGNN_STATUS_OUT_OF_RANGE && strstr(degnn_last_error_message(), "9") != NULL;

    degnn_graph_free(g);
    printf("edges=%llu spd02=%.1f rw20=%.2f h=%.2f oob=%d\n", (unsigned long long)m, spd[2 * 4 + 2],
           rw[2 * 2 + 1], h, ok);
    return 0;
}
