#include <math.h>
#include <stdio.h>
#include "lifesurplus.h"

#define TRY(call)                                                   \
    do {                                                            \
        LsStatus s_ = (call);                                       \
        if (s_ != LS_STATUS_OK) {                                   \
            fprintf(stderr, "%s: %d %s\n", #call, s_, ls_last_error()); \
            return 1;                                               \
        }                                                           \
    } while (0)

int main(void) {
    LsBasis *first = NULL, *second = NULL;
    LsContract *proto = NULL, *l = NULL, *m = NULL;
    LsCurve *v = NULL, *w = NULL;
    double p, epv, origin, step, buf[8];
    size_t n;

    TRY(ls_basis_new_g82m(0.05, 40.0, &first));
    TRY(ls_basis_rescaled(first, 1.5, 0.8, &second));
    TRY(ls_contract_new(first, LS_PRODUCT_ENDOWMENT, 20.0, 1.0, 0.0, &proto));
    TRY(ls_equivalence_premium(first, proto, 0.005, &p));
    TRY(ls_contract_with_premium(proto, p, &l));
    TRY(ls_contract_on_basis(l, second, &m));
    TRY(ls_policy_values(l, 1.0, 0.005, &v));
    TRY(ls_accumulation(l, 0.0, 0.005, &w));
    TRY(ls_curve_grid(v, &origin, &step));
    TRY(ls_curve_values(v, buf, 8, &n));
    TRY(ls_total_surplus_epv(l, m, 0.005, &epv));

    if (ls_curve_len(v) != 4001 || n != 8 || fabs(buf[0]) > 1e-9 || step != 0.005) return 2;
    if (epv <= 0.0) return 3;
    if (ls_contract_new(first, LS_PRODUCT_ENDOWMENT, -1.0, 1.0, p, &proto) != LS_STATUS_DOMAIN) return 4;
    if (ls_last_error()[0] == '\0') return 5;
    printf("premium %.10f epv %.10f\n", p, epv);

    ls_curve_free(v);
    ls_curve_free(w);
    ls_contract_free(proto);
    ls_contract_free(l);
    ls_contract_free(m);
    ls_basis_free(first);
    ls_basis_free(second);
    return 0;
}
