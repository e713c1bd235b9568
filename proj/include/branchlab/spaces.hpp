#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "branchlab/offspring.hpp"

namespace branchlab::lattice {

inline constexpr int kMaxDimension = 3;
inline constexpr std::int64_t kMaxCoordinate = (std::int64_t{1} << 20) - 1;

/// Site of Z^d (d <= 3) packed into a StateIndex, 21 bits per zigzag-coded
/// coordinate. Coordinates must satisfy |c| <= kMaxCoordinate.
StateIndex encode(const std::vector<std::int64_t>& coords);
std::vector<std::int64_t> decode(StateIndex s, int dim);

/// Each child jumps to one of the 2d nearest neighbours uniformly, or stays
/// put with probability `laziness`.
std::shared_ptr<const Displacement> nearest_neighbour_walk(int dim, double laziness = 0.0);

}  // namespace branchlab::lattice

namespace branchlab {

/// Graph loaded from a whitespace-separated edge list "from to weight" (weights
/// normalized per source vertex, '#' starts a comment). Vertex ids are the
/// StateIndex ids. A vertex with no outgoing edge keeps its children in place.
struct WeightedGraph {
    std::vector<std::vector<KernelEntry>> rows;

    static WeightedGraph load(const std::filesystem::path& path);
    std::shared_ptr<const Displacement> walk() const;
};

}  // namespace branchlab
