#ifndef LIFESURPLUS_H
#define LIFESURPLUS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every call.
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_DOMAIN = 2,
  LS_STATUS_NUMERICAL = 3,
  LS_STATUS_DEGENERATE = 4,
  LS_STATUS_CONSISTENCY = 5,
  LS_STATUS_PANIC = 6,
} LsStatus;

// Benefit shape of a contract.
typedef enum LsProduct {
  // Pays the sum on death before the term.
  LS_PRODUCT_TERM_ASSURANCE = 0,
  // Pays the sum on death before the term or at the term on survival.
  LS_PRODUCT_ENDOWMENT = 1,
} LsProduct;

// Interest and mortality intensities.
typedef struct LsBasis LsBasis;

// A technical basis together with contractual cashflows.
typedef struct LsContract LsContract;

// Values on a uniform mesh.
typedef struct LsCurve LsCurve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. The pointer
// stays valid until the next failing call on the same thread.
const char *ls_last_error(void);

// Basis with constant force of interest and Makeham mortality
// `a + b c^(age + t)`.
//
// # Safety
// `out` must be valid for writes.
enum LsStatus ls_basis_new_makeham(double delta,
                                   double a,
                                   double b,
                                   double c,
                                   double age,
                                   struct LsBasis **out);

// Basis with constant force of interest and G82 males mortality from `age`.
//
// # Safety
// `out` must be valid for writes.
enum LsStatus ls_basis_new_g82m(double delta, double age, struct LsBasis **out);

// New basis with interest times `delta_factor` and mortality times
// `mu_factor`.
//
// # Safety
// `basis` must come from this library; `out` must be valid for writes.
enum LsStatus ls_basis_rescaled(const struct LsBasis *basis,
                                double delta_factor,
                                double mu_factor,
                                struct LsBasis **out);

// # Safety
// `basis` must be null or come from this library, and not be used again.
void ls_basis_free(struct LsBasis *basis);

// Contract of `term` years paying `sum` with level premium rate `premium`,
// valued on `basis`. The basis is copied.
//
// # Safety
// `basis` must come from this library; `out` must be valid for writes.
enum LsStatus ls_contract_new(const struct LsBasis *basis,
                              enum LsProduct product,
                              double term,
                              double sum,
                              double premium,
                              struct LsContract **out);

// Same cashflows with another level premium rate.
//
// # Safety
// `contract` must come from this library; `out` must be valid for writes.
enum LsStatus ls_contract_with_premium(const struct LsContract *contract,
                                       double premium,
                                       struct LsContract **out);

// Same cashflows valued on another basis.
//
// # Safety
// Both handles must come from this library; `out` must be valid for writes.
enum LsStatus ls_contract_on_basis(const struct LsContract *contract,
                                   const struct LsBasis *basis,
                                   struct LsContract **out);

// # Safety
// `contract` must be null or come from this library, and not be used again.
void ls_contract_free(struct LsContract *contract);

// Level premium rate making the contract's expected present value zero on
// `basis`. The contract's own premium is ignored.
//
// # Safety
// Both handles must come from this library; `out` must be valid for writes.
enum LsStatus ls_equivalence_premium(const struct LsBasis *basis,
                                     const struct LsContract *contract,
                                     double h,
                                     double *out);

// Prospective policy values on `0, h, ..., term` with value `terminal`
// just after the term.
//
// # Safety
// `contract` must come from this library; `out` must be valid for writes.
enum LsStatus ls_policy_values(const struct LsContract *contract,
                               double terminal,
                               double h,
                               struct LsCurve **out);

// Retrospective accumulation on `0, h, ..., term` starting from `initial`.
//
// # Safety
// `contract` must come from this library; `out` must be valid for writes.
enum LsStatus ls_accumulation(const struct LsContract *contract,
                              double initial,
                              double h,
                              struct LsCurve **out);

// Discounted modeled surplus when `valuation` reserves and `experience`
// happens.
//
// # Safety
// Both handles must come from this library; `out` must be valid for writes.
enum LsStatus ls_modeled_surplus(const struct LsContract *valuation,
                                 const struct LsContract *experience,
                                 double h,
                                 struct LsCurve **out);

// Expected present value at 0 of all surplus emerging over the term.
//
// # Safety
// Both handles must come from this library; `out` must be valid for writes.
enum LsStatus ls_total_surplus_epv(const struct LsContract *valuation,
                                   const struct LsContract *experience,
                                   double h,
                                   double *out);

// Paid-up factor at mesh node `t`.
//
// # Safety
// `contract` must come from this library; `out` must be valid for writes.
enum LsStatus ls_paidup_factor(const struct LsContract *contract, double t, double h, double *out);

// Number of values; 0 for a null handle.
//
// # Safety
// `curve` must be null or come from this library.
uintptr_t ls_curve_len(const struct LsCurve *curve);

// Time of the first value and mesh step.
//
// # Safety
// `curve` must come from this library; the out-pointers must be valid.
enum LsStatus ls_curve_grid(const struct LsCurve *curve, double *origin, double *step);

// Copies up to `cap` values into `buf` and stores the count in `written`.
//
// # Safety
// `curve` must come from this library, `buf` valid for `cap` writes and
// `written` valid for one.
enum LsStatus ls_curve_values(const struct LsCurve *curve,
                              double *buf,
                              uintptr_t cap,
                              uintptr_t *written);

// # Safety
// `curve` must be null or come from this library, and not be used again.
void ls_curve_free(struct LsCurve *curve);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIFESURPLUS_H */
