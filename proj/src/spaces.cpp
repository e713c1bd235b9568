#include "branchlab/spaces.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace branchlab::lattice {

namespace {

constexpr int kBits = 21;
constexpr std::uint64_t kMask = (std::uint64_t{1} << kBits) - 1;

std::uint64_t zigzag(std::int64_t v) {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

std::int64_t unzigzag(std::uint64_t z) {
    return static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
}

}  // namespace

StateIndex encode(const std::vector<std::int64_t>& coords) {
    if (coords.empty() || coords.size() > kMaxDimension) throw ValidationError("lattice dimension must be 1, 2 or 3");
    std::uint64_t id = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (std::abs(coords[i]) > kMaxCoordinate) throw TruncationOverflow("lattice coordinate out of range");
        id |= zigzag(coords[i]) << (kBits * i);
    }
    return StateIndex{id};
}

std::vector<std::int64_t> decode(StateIndex s, int dim) {
    std::vector<std::int64_t> out(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) out[static_cast<std::size_t>(i)] = unzigzag((s.id >> (kBits * i)) & kMask);
    return out;
}

std::shared_ptr<const Displacement> nearest_neighbour_walk(int dim, double laziness) {
    if (dim < 1 || dim > kMaxDimension) throw ValidationError("lattice dimension must be 1, 2 or 3");
    if (!(laziness >= 0.0 && laziness < 1.0)) throw ValidationError("laziness must lie in [0, 1)");
    const double step = (1.0 - laziness) / (2.0 * dim);
    return std::make_shared<IndependentJumps>([dim, laziness, step](StateIndex x, std::vector<KernelEntry>& out) {
        auto c = decode(x, dim);
        if (laziness > 0.0) out.push_back({x, laziness});
        for (int i = 0; i < dim; ++i) {
            for (int sign : {-1, 1}) {
                auto n = c;
                n[static_cast<std::size_t>(i)] += sign;
                out.push_back({encode(n), step});
            }
        }
    });
}

}  // namespace branchlab::lattice

namespace branchlab {

WeightedGraph WeightedGraph::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open graph file " + path.string());
    WeightedGraph g;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        std::uint64_t from = 0, to = 0;
        double weight = 1.0;
        if (!(fields >> from)) continue;
        if (!(fields >> to)) throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected 'from to [weight]'");
        if (!(fields >> weight)) weight = 1.0;
        if (!(weight > 0.0) || !std::isfinite(weight)) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": weight must be positive");
        }
        const auto need = std::max(from, to) + 1;
        if (need > (1u << 26)) throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": vertex id too large");
        if (g.rows.size() < need) g.rows.resize(need);
        g.rows[from].push_back({StateIndex{to}, weight});
    }
    for (auto& row : g.rows) {
        double total = 0.0;
        for (const auto& e : row) total += e.weight;
        for (auto& e : row) e.weight /= total;
    }
    return g;
}

std::shared_ptr<const Displacement> WeightedGraph::walk() const {
    auto rows_ptr = std::make_shared<const std::vector<std::vector<KernelEntry>>>(rows);
    return std::make_shared<IndependentJumps>([rows_ptr](StateIndex x, std::vector<KernelEntry>& out) {
        if (x.id < rows_ptr->size() && !(*rows_ptr)[x.id].empty()) {
            const auto& r = (*rows_ptr)[x.id];
            out.insert(out.end(), r.begin(), r.end());
        } else {
            out.push_back({x, 1.0});
        }
    });
}

}  // namespace branchlab
