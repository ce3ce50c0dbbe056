#include "topolearn/instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topolearn/error.hpp"
#include "topolearn/reconstruction.hpp"
#include "topolearn/spectral.hpp"

namespace topolearn {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Greedily adds nodes from `pool` (shuffled) that keep pairwise distance >= 3 from `chosen`.
void add_spaced(const UndirectedGraph& tree, std::vector<NodeId> pool, std::size_t want, NodeSet& chosen,
                std::mt19937_64& rng) {
  std::shuffle(pool.begin(), pool.end(), rng);
  for (NodeId v : pool) {
    if (chosen.size() >= want) return;
    if (chosen.contains(v)) continue;
    const auto dist = hop_distances(tree, v);
    const bool spaced = std::all_of(chosen.begin(), chosen.end(), [&](NodeId c) { return dist[c] >= 3; });
    if (spaced) chosen.insert(v);
  }
}

std::vector<NodeId> far_from_leaves(const UndirectedGraph& tree) {
  const NodeSet leaf_set = leaves(tree);
  std::vector<NodeId> out;
  for (NodeId v = 0; v < tree.node_count(); ++v) {
    const auto dist = hop_distances(tree, v);
    if (std::all_of(leaf_set.begin(), leaf_set.end(), [&](NodeId l) { return dist[l] >= 3; })) out.push_back(v);
  }
  return out;
}

}  // namespace

void InstanceParams::validate() const {
  if (min_nodes < 2 || max_nodes < min_nodes) throw ConfigError("invalid node count range");
  if (max_corrupt < min_corrupt) throw ConfigError("invalid corrupt count range");
  if (!(max_spectral_radius > 0.0 && max_spectral_radius < 1.0)) throw ConfigError("spectral radius cap must lie in (0, 1)");
  if (violation != SpacingViolation::None && min_corrupt == 0) {
    throw ConfigError("a spacing violation needs at least one corrupt node");
  }
}

UndirectedGraph random_tree(std::size_t nodes, std::mt19937_64& rng) {
  if (nodes == 0) throw ConfigError("a tree needs at least one node");
  UndirectedGraph g(nodes);
  std::size_t count = 1;
  while (count < nodes) {
    NodeId anchor = uniform_index(rng, 0, count - 1);
    const std::size_t length = uniform_index(rng, 1, std::min<std::size_t>(4, nodes - count));
    for (std::size_t k = 0; k < length; ++k) {
      g.add_edge(anchor, count);
      anchor = count++;
    }
  }
  return g;
}

GenerativeModel random_model(const UndirectedGraph& tree, std::mt19937_64& rng, double max_spectral_radius) {
  const std::size_t n = tree.node_count();
  std::vector<std::string> labels;
  std::vector<NodeDynamics> dynamics(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back(std::to_string(i + 1));
    if (uniform_index(rng, 1, 2) == 1) {
      dynamics[i].ar = {uniform(rng, -0.5, 0.5)};
    } else {
      dynamics[i].ar = {uniform(rng, -0.5, 0.5), uniform(rng, -0.3, 0.3)};
    }
    dynamics[i].noise_variance = uniform(rng, 0.5, 2.0);
  }
  GenerativeModel::Coupling coupling;
  auto draw = [&] {
    const double mag = uniform(rng, 0.3, 0.9);
    return uniform_index(rng, 0, 1) == 0 ? mag : -mag;
  };
  for (const Edge& e : tree.edges()) {
    coupling[{e.a, e.b}] = draw();
    coupling[{e.b, e.a}] = draw();
  }
  for (int attempt = 0; attempt < 200; ++attempt) {
    GenerativeModel model(tree, labels, coupling, dynamics);
    if (model.spectral_radius() <= max_spectral_radius) return model;
    for (auto& [key, b] : coupling) b *= 0.9;
  }
  throw NumericalError("could not stabilise the random model");
}

CorruptionSpec random_corruption(NodeId node, std::mt19937_64& rng) {
  CorruptionSpec spec;
  spec.node = node;
  switch (uniform_index(rng, 0, 2)) {
    case 0: {
      static constexpr long kShifts[] = {-3, -2, -1, 1, 2, 3};
      spec.model = RandomDelay{kShifts[uniform_index(rng, 0, 5)], 0, uniform(rng, 0.6, 0.9)};
      break;
    }
    case 1:
      spec.model = PacketDrop{uniform(rng, 0.5, 0.9)};
      break;
    default:
      spec.model = NoisyFilter{{1.0, uniform(rng, -0.4, 0.4), uniform(rng, -0.4, 0.4)}, uniform(rng, 0.3, 1.5)};
      break;
  }
  return spec;
}

Instance random_instance(const InstanceParams& params, std::mt19937_64& rng) {
  params.validate();
  for (std::size_t attempt = 0; attempt < params.max_attempts; ++attempt) {
    const std::size_t n = uniform_index(rng, params.min_nodes, params.max_nodes);
    const UndirectedGraph tree = random_tree(n, rng);
    const std::size_t want = uniform_index(rng, params.min_corrupt, params.max_corrupt);
    const std::vector<NodeId> spaced_pool = far_from_leaves(tree);
    const NodeSet leaf_set = leaves(tree);
    NodeSet corrupt;

    switch (params.violation) {
      case SpacingViolation::None:
        add_spaced(tree, spaced_pool, want, corrupt, rng);
        break;
      case SpacingViolation::CorruptNearLeaf: {
        std::vector<NodeId> near;
        for (NodeId v = 0; v < n; ++v) {
          if (leaf_set.contains(v)) continue;
          const auto dist = hop_distances(tree, v);
          const bool two = std::any_of(leaf_set.begin(), leaf_set.end(), [&](NodeId l) { return dist[l] == 2; });
          const bool one = std::any_of(leaf_set.begin(), leaf_set.end(), [&](NodeId l) { return dist[l] == 1; });
          if (two && !one) near.push_back(v);
        }
        if (near.empty()) continue;
        corrupt.insert(near[uniform_index(rng, 0, near.size() - 1)]);
        add_spaced(tree, spaced_pool, want, corrupt, rng);
        break;
      }
      case SpacingViolation::CorruptPairTwoHops: {
        std::vector<Edge> pairs;
        for (NodeId v = 0; v < n; ++v) {
          if (leaf_set.contains(v)) continue;
          for (NodeId w : n_hop_neighbors(tree, v, 2)) {
            if (w > v && !leaf_set.contains(w)) pairs.emplace_back(v, w);
          }
        }
        if (pairs.empty()) continue;
        const Edge pick = pairs[uniform_index(rng, 0, pairs.size() - 1)];
        corrupt = {pick.a, pick.b};
        add_spaced(tree, spaced_pool, want, corrupt, rng);
        break;
      }
    }
    if (corrupt.size() < want) continue;
    if (params.violation == SpacingViolation::None && !satisfies_assumption(tree, corrupt)) continue;

    Instance inst;
    inst.model = random_model(tree, rng, params.max_spectral_radius);
    inst.corrupt = corrupt;
    for (NodeId v : corrupt) inst.corruption.push_back(random_corruption(v, rng));
    return inst;
  }
  throw ConfigError("no random instance satisfies the requested constraints");
}

SpectralMatrix analytic_corrupted_inverse(const Instance& instance, const FrequencyGrid& grid) {
  const SignatureMap sigs = analytic_signatures(instance.model, instance.corruption, grid);
  return invert_spectrum(analytic_corrupted_psd(instance.model, sigs, grid));
}

InstanceMargins analytic_margins(const Instance& instance, const SpectralMatrix& inverse,
                                 const EdgeDecisionParams& params) {
  const UndirectedGraph& tree = instance.model.topology();
  const std::size_t n = tree.node_count();
  const UndirectedGraph expected = perturbed_graph(moral_graph(tree), instance.corrupt);
  const Eigen::MatrixXd scores = support_scores(inverse);

  InstanceMargins m;
  m.weakest_edge = std::numeric_limits<double>::infinity();
  m.weakest_nonconstant = std::numeric_limits<double>::infinity();
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double s = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (expected.has_edge(i, j)) {
        m.weakest_edge = std::min(m.weakest_edge, s);
      } else {
        m.strongest_non_edge = std::max(m.strongest_non_edge, s);
      }
    }
  }
  auto phase = [&](NodeId a, NodeId b) { return phase_nonconstancy_score(inverse, a, b, params); };
  auto nonconstant = [&](double s) { m.weakest_nonconstant = std::min(m.weakest_nonconstant, s); };
  auto constant = [&](double s) { m.strongest_constant = std::max(m.strongest_constant, s); };

  for (NodeId leaf : leaves(tree)) {
    if (instance.corrupt.contains(leaf)) continue;
    for (NodeId j : expected.neighbors(leaf)) {
      const double s = phase(leaf, j);
      if (tree.has_edge(leaf, j)) {
        nonconstant(s);
      } else {
        constant(s);
      }
    }
  }
  for (NodeId l : instance.corrupt) {
    std::vector<double> true_edges;
    for (NodeId j : tree.neighbors(l)) true_edges.push_back(phase(l, j));
    std::sort(true_edges.rbegin(), true_edges.rend());
    if (true_edges.size() >= 2) nonconstant(true_edges[1]);
    // Alignment table around l: only the outer pair of p - q - l - r - s is constant.
    for (NodeId q : tree.neighbors(l)) {
      for (NodeId r : tree.neighbors(l)) {
        if (r <= q) continue;
        for (NodeId p : tree.neighbors(q)) {
          if (p == l) continue;
          for (NodeId s : tree.neighbors(r)) {
            if (s == l) continue;
            constant(phase(p, s));
            nonconstant(phase(p, r));
            nonconstant(phase(q, s));
            nonconstant(phase(q, r));
          }
        }
      }
    }
  }
  return m;
}

bool well_separated(const InstanceMargins& margins, const EdgeDecisionParams& params, SeparationSlack slack) {
  return margins.weakest_edge >= slack.magnitude * params.magnitude_threshold &&
         margins.strongest_non_edge <= params.magnitude_threshold / slack.magnitude &&
         margins.weakest_nonconstant >= slack.phase * params.phase_threshold &&
         margins.strongest_constant <= params.phase_threshold / slack.phase;
}

Instance random_separated_instance(const InstanceParams& params, const EdgeDecisionParams& decision,
                                   const FrequencyGrid& grid, std::mt19937_64& rng, std::size_t* rejected,
                                   SeparationSlack slack) {
  for (std::size_t attempt = 0; attempt < params.max_attempts; ++attempt) {
    Instance inst = random_instance(params, rng);
    const SpectralMatrix inverse = analytic_corrupted_inverse(inst, grid);
    if (well_separated(analytic_margins(inst, inverse, decision), decision, slack)) return inst;
    if (rejected) ++*rejected;
  }
  throw ConfigError("no well separated random instance found");
}

}  // namespace topolearn
