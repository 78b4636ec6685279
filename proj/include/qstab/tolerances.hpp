#pragma once

// Numerical tolerances shared across the library. Values are absolute
// unless noted otherwise.
namespace qstab::tol {

inline constexpr double kNorm = 1e-10;           // state norm after unitaries
inline constexpr double kUnitary = 1e-10;        // ||U^dag U - I||_max
inline constexpr double kUnitaryAccum = 1e-9;    // after long pulse sequences
inline constexpr double kHermitian = 1e-12;      // ||H - H^dag||_max
inline constexpr double kTrace = 1e-12;          // traceless projections
inline constexpr double kProjector = 1e-12;      // ||P^2 - P||_max, ||P - P^dag||_max
inline constexpr double kRecovery = 1e-10;       // post-recovery fidelity vs 1
inline constexpr double kCodeSpace = 1e-9;       // projector membership checks

}  // namespace qstab::tol
