#pragma once

namespace qfikit {

// Central tolerance record.  Every numeric guard in the library reads its
// default from here; functions that take an explicit tolerance argument
// default to these values.
struct Tolerances {
  double hermiticity = 1e-12;     // relative: scaled by (1 + max |entry|)
  double orthonormality = 1e-10;  // max-norm of V^dag V - I
  double reconstruction = 1e-10;  // relative: max-norm of V L V^dag - H
  double unitarity = 1e-10;       // max-norm of U^dag U - I
  double trace = 1e-12;           // |Tr rho - 1|
  double positivity = 1e-12;      // smallest density eigenvalue >= -positivity
  double support = 1e-12;         // support cutoff, relative to largest eigenvalue
  double series_term = 1e-12;     // series truncation: max-norm of added term
  double cycle = 1e-10;           // two-term cycle detection, relative
  double quadrature = 1e-10;      // node-doubling convergence, max-norm
  double closed_form = 1e-10;     // commutator structure residuals, relative
  double fd_step = 1e-5;          // central-difference step
  double qfi_clamp = 1e-10;       // negative QFI within this window clamps to 0
  double agreement = 1e-7;        // backend cross-validation
  double cr_threshold = 1e-10;    // Cramer-Rao commutator condition

  static const Tolerances& standard();
};

}  // namespace qfikit
