#pragma once

#include "dlayer/dynamics.hpp"
#include "dlayer/graph.hpp"
#include "dlayer/linalg.hpp"
#include "dlayer/partition.hpp"

namespace dlayer {

// Whole-network affine system d/dt [x; z] = Q [x; z] + drift.
//   Row:    Q = [[-A'A - L_G, A'L], [A, -L]]
//   Column: Q = [[-A'A - L, A'L_G], [A, -L_G]]
// where A is a_hat, L the block diagonal of lifted agent-graph Laplacians and
// L_G the lifted cluster-graph Laplacian.
struct CompactSystem {
    Scheme scheme = Scheme::Row;
    Matrix a_hat;
    Vector b_hat;
    Matrix l_hat;
    Matrix l_hat_g;
    Matrix q;
    Vector drift;  // [a_hat' b_hat; -b_hat]

    Vector apply(const Vector& xz) const { return q * xz + drift; }
};

CompactSystem assemble_compact(const Partition& part, const Topology& topo);

// Operands of M = [[-M1'M1 - M2, M1'M3], [M1, -M3]]. M2 and M3 must be
// symmetric positive semi-definite.
struct LemmaCheckInput {
    Matrix m1;
    Matrix m2;
    Matrix m3;
};

// Tolerance for symmetry and PSD checks on M2 and M3, relative to 1 + ||M||.
inline constexpr double kPsdTolerance = 1e-10;
// Tolerance for the spectral conditions, relative to 1 + ||M||.
inline constexpr double kSpectralTolerance = 1e-8;

// Throws ShapeMismatch or NotPositiveSemidefinite.
void validate(const LemmaCheckInput& inp);

Matrix lemma_matrix(const LemmaCheckInput& inp);

// diag(I, M3') * M, which is symmetric negative semi-definite for valid input.
Matrix symmetrized_lemma_matrix(const LemmaCheckInput& inp);

struct SpectralVerdict {
    Spectrum spectrum;
    double scale = 1.0;     // 1 + ||M||_2
    double max_imag = 0.0;  // max |Im lambda|
    double max_real = 0.0;  // max Re lambda
    bool real = false;          // max_imag < tol * scale
    bool nonpositive = false;   // max_real < tol * scale
    bool nondefective = false;  // rank(M) == rank(M^2)

    bool passed() const noexcept { return real && nonpositive && nondefective; }
};

// Spectral conditions on an arbitrary square matrix, without structural checks.
SpectralVerdict spectral_verdict(const Matrix& m);

SpectralVerdict check_lemma1(const LemmaCheckInput& inp);

// The lemma operands a compact system instantiates: (A, L_G, L) for Row and
// (A, L, L_G) for Column.
LemmaCheckInput lemma_operands(const CompactSystem& cs);

// Validates the Laplacian blocks, confirms q matches its operands, then applies
// the lemma conditions to q.
SpectralVerdict check_q_spectrum(const CompactSystem& cs);

struct Certificate {
    Vector x;  // stacked x_hat
    Vector z;  // stacked z_hat

    Vector stacked() const;
};

// Least-squares residual bound used to decide that Ax = b is consistent,
// relative to 1 + ||b||.
inline constexpr double kConsistencyTolerance = 1e-8;

// Equilibrium of the compact system built from a solution y of Ax = b.
// Throws InconsistentSystem when Ax = b has no solution.
Certificate equilibrium_certificate(const CompactSystem& cs, const Partition& part);

// Limit of the compact flow started from the stacked state s0: the equilibrium
// plus the kernel component of the initial error. Empty when Ax = b is
// inconsistent or zero is a defective eigenvalue of q.
std::optional<Vector> flow_limit(const CompactSystem& cs, const Partition& part, const Vector& s0);

}  // namespace dlayer
