#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "topolearn/corruption.hpp"
#include "topolearn/detection.hpp"
#include "topolearn/graph.hpp"
#include "topolearn/model.hpp"

namespace topolearn {

/// Ways a generated instance may deliberately break the corrupt-node spacing requirement.
enum class SpacingViolation {
  None,
  CorruptNearLeaf,     // a corrupt node exactly two hops from a leaf
  CorruptPairTwoHops,  // two corrupt nodes exactly two hops apart
};

struct InstanceParams {
  std::size_t min_nodes = 7;
  std::size_t max_nodes = 15;
  std::size_t min_corrupt = 1;
  std::size_t max_corrupt = 3;
  SpacingViolation violation = SpacingViolation::None;
  double max_spectral_radius = 0.9;
  std::size_t max_attempts = 10'000;

  void validate() const;
};

struct Instance {
  GenerativeModel model;
  std::vector<CorruptionSpec> corruption;
  NodeSet corrupt;
};

/// Tree grown by hanging paths of 1 to 4 nodes off random existing nodes.
UndirectedGraph random_tree(std::size_t nodes, std::mt19937_64& rng);

/// Random stable model on `tree`: couplings of magnitude in [0.3, 0.9] with random
/// sign (scaled down together until the spectral radius is small enough), self
/// dynamics of order one or two, noise variances in [0.5, 2].
GenerativeModel random_model(const UndirectedGraph& tree, std::mt19937_64& rng, double max_spectral_radius = 0.9);

/// One of the three corruption kinds with random parameters.
CorruptionSpec random_corruption(NodeId node, std::mt19937_64& rng);

/// Random instance honouring `params`. Throws ConfigError if no instance is found.
Instance random_instance(const InstanceParams& params, std::mt19937_64& rng);

/// Margins of an analytic instance against the decision thresholds.
struct InstanceMargins {
  double weakest_edge = 0.0;          // smallest support score over perturbed-graph edges
  double strongest_non_edge = 0.0;    // largest support score elsewhere
  double weakest_nonconstant = 0.0;   // smallest phase score that theory says is non-constant
  double strongest_constant = 0.0;    // largest phase score that theory says is constant
};

/// Support and phase margins on the exact corrupted inverse spectrum, using ground truth
/// to decide which entries must be present and which phases must be constant.
InstanceMargins analytic_margins(const Instance& instance, const SpectralMatrix& inverse,
                                 const EdgeDecisionParams& params);

/// Required clearance of the analytic margins over the decision thresholds.
struct SeparationSlack {
  double magnitude = 100.0;
  double phase = 2.0;
};

/// True when no margin comes close to a threshold (no near-cancellation).
bool well_separated(const InstanceMargins& margins, const EdgeDecisionParams& params, SeparationSlack slack = {});

/// Exact corrupted inverse spectrum of an instance: the inverse of H Phi H^* + D on `grid`.
SpectralMatrix analytic_corrupted_inverse(const Instance& instance, const FrequencyGrid& grid);

/// Draws instances until one is well separated on `grid`; counts rejections in `rejected`.
Instance random_separated_instance(const InstanceParams& params, const EdgeDecisionParams& decision,
                                   const FrequencyGrid& grid, std::mt19937_64& rng, std::size_t* rejected = nullptr,
                                   SeparationSlack slack = {});

}  // namespace topolearn
