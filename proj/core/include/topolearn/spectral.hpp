#pragma once

#include <span>
#include <vector>

#include "topolearn/corruption.hpp"
#include "topolearn/model.hpp"
#include "topolearn/spectrum.hpp"
#include "topolearn/welch.hpp"

namespace topolearn {

/// 1e-10 times the median diagonal entry over all frequencies.
double default_ridge(const SpectralMatrix& s);

/// Per-frequency inverse of (M + ridge I) for Hermitian M.
///
/// Frequencies whose matrix is not positive definite or whose condition number
/// exceeds `max_condition` are excluded in the result (their values are zero).
/// Throws NumericalError if an input matrix is visibly non-Hermitian.
SpectralMatrix invert_spectrum(const SpectralMatrix& s, double ridge = 0.0, double max_condition = 1e12);

/// H Phi_xx H^* + diag(d) for the given per-node signatures (identity for absent nodes).
SpectralMatrix analytic_corrupted_psd(const GenerativeModel& model, const SignatureMap& signatures,
                                      const FrequencyGrid& grid);

/// Inverse of the corrupted PSD built by one rank-one update per corrupt node.
struct WoodburyChain {
  SpectralMatrix inverse;             // after the last update
  std::vector<SpectralMatrix> steps;  // steps[k] after k updates; steps[0] is the uncorrupted start
  std::vector<NodeId> order;          // update order
};

/// Starts from the clean inverse PSD scaled by 1/(conj(h_i) h_j) and folds in each
/// corrupt node in `order` (default: ascending). Frequencies where some h vanishes
/// are excluded. Throws NumericalError when an update denominator vanishes.
WoodburyChain woodbury_chain_inverse(const GenerativeModel& model, const SignatureMap& signatures,
                                     const FrequencyGrid& grid, std::span<const NodeId> order = {});

/// Principal submatrix over `nodes` (kept in the given order).
SpectralMatrix principal_submatrix(const SpectralMatrix& s, std::span<const NodeId> nodes);

/// Inverse of the principal submatrix over `observed` (marginalisation, not a submatrix of the inverse).
SpectralMatrix marginal_inverse_psd(const SpectralMatrix& psd, std::span<const NodeId> observed, double ridge = 0.0);

}  // namespace topolearn
