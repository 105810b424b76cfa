#ifndef DECOLAB_H
#define DECOLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DecolabStatus {
  DECOLAB_STATUS_OK = 0,
  DECOLAB_STATUS_NULL_POINTER = 1,
  DECOLAB_STATUS_INVALID_ARGUMENT = 2,
  DECOLAB_STATUS_SOLVER_FAILURE = 3,
  DECOLAB_STATUS_IO_ERROR = 4,
  DECOLAB_STATUS_BUFFER_TOO_SMALL = 5,
  DECOLAB_STATUS_PANIC = 6,
} DecolabStatus;

// Position-space density matrix.
typedef struct DecolabDensity DecolabDensity;

// Wigner function on the position–momentum lattice.
typedef struct DecolabWigner DecolabWigner;

// Bath and potential for [`decolab_evolve`]. The potential is
// `Σ cₖxᵏ + F·x·cos(ωt)`.
typedef struct DecolabModel {
  double mass;
  double gamma;
  double diffusion;
  double coefficients[5];
  double drive_amplitude;
  double drive_frequency;
} DecolabModel;

// Library version as a static NUL-terminated string.
const char *decolab_version(void);

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL.
size_t decolab_last_error(char *buf, size_t len);

// Pure Gaussian packet `exp(−(x−x₀)²/4σ² + ip₀x)` on an `n`-point grid over `[−L, L)`.
enum DecolabStatus decolab_density_gaussian(size_t n,
                                            double half_extent,
                                            double center,
                                            double momentum,
                                            double width,
                                            struct DecolabDensity **out);

// Cat state: two packets of spread `width` at `±separation/2` with relative phase `phase`.
enum DecolabStatus decolab_density_cat(size_t n,
                                       double half_extent,
                                       double separation,
                                       double width,
                                       double phase,
                                       struct DecolabDensity **out);

void decolab_density_free(struct DecolabDensity *rho);

// Grid size `n`; the matrix has `n²` entries.
enum DecolabStatus decolab_density_size(const struct DecolabDensity *rho, size_t *n);

enum DecolabStatus decolab_density_trace(const struct DecolabDensity *rho, double *out);

enum DecolabStatus decolab_density_purity(const struct DecolabDensity *rho, double *out);

// Von Neumann entropy in bits.
enum DecolabStatus decolab_density_entropy(const struct DecolabDensity *rho, double *out);

// Copies the entries into `re` and `im`, each of length `len ≥ n²`.
enum DecolabStatus decolab_density_entries(const struct DecolabDensity *rho,
                                           double *re,
                                           double *im,
                                           size_t len);

// Evolves `rho` with the master equation to `t_final` and returns the
// final state as a new handle.
enum DecolabStatus decolab_evolve(const struct DecolabDensity *rho,
                                  const struct DecolabModel *model,
                                  double t_final,
                                  double dt,
                                  struct DecolabDensity **out);

enum DecolabStatus decolab_wigner_from_density(const struct DecolabDensity *rho,
                                               struct DecolabWigner **out);

void decolab_wigner_free(struct DecolabWigner *w);

// Copies the `n²` values, rows indexed by position.
enum DecolabStatus decolab_wigner_values(const struct DecolabWigner *w, double *buf, size_t len);

enum DecolabStatus decolab_wigner_normalization(const struct DecolabWigner *w, double *out);

// `∬ max(−W, 0) dx dp`.
enum DecolabStatus decolab_wigner_negativity(const struct DecolabWigner *w, double *out);

// Entropy gain `−Σ|a|² lg|a|²` of the measurement `α|↑⟩ + β|↓⟩`, in bits.
enum DecolabStatus decolab_entropy_gain(double alpha_re,
                                        double alpha_im,
                                        double beta_re,
                                        double beta_im,
                                        double *out);

// Minimum discord of a 4×4 system–detector density matrix given as
// row-major real and imaginary parts, measured on the detector. Bloch
// angles of the optimal basis go to `theta` and `phi` (radians); the
// mutual information to `mutual` (may be null).
enum DecolabStatus decolab_min_discord(const double *re,
                                       const double *im,
                                       double *discord,
                                       double *theta,
                                       double *phi,
                                       double *mutual);

// `τ_D = τ_R(λ_dB/Δx)²` in SI units: kg, K, s, m.
enum DecolabStatus decolab_decoherence_time(double mass,
                                            double temperature,
                                            double relaxation_time,
                                            double separation,
                                            double *tau_d,
                                            double *lambda_db,
                                            double *ratio);

// Runs a named experiment exactly as the command-line tool would.
// `config` holds `key = value` lines (may be null or empty). The process
// exit status the tool would return goes to `exit_code`.
enum DecolabStatus decolab_run_experiment(const char *experiment,
                                          const char *config,
                                          const char *out_dir,
                                          int *exit_code);

#endif  /* DECOLAB_H */
