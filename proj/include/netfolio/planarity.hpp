#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace netfolio {

using NodePair = std::pair<int, int>;

/// Left-right planarity criterion (de Fraysseix-Rosenstiehl, in Brandes'
/// formulation). Runs in O(n + m). Self-loops and repeated pairs are ignored.
bool is_planar(std::size_t n_nodes, std::span<const NodePair> edges);

}  // namespace netfolio
