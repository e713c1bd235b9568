#include "branchlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace branchlab {

std::vector<KernelEntry> ExpectationKernel::row(StateIndex x) const {
    std::vector<KernelEntry> raw;
    factory_(x, raw);
    for (const auto& e : raw) {
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
            throw ValidationError("kernel weight must be finite and nonnegative (state " + std::to_string(x.id) + ")");
        }
    }
    std::sort(raw.begin(), raw.end(), [](const KernelEntry& a, const KernelEntry& b) { return a.to < b.to; });
    std::vector<KernelEntry> merged;
    merged.reserve(raw.size());
    for (const auto& e : raw) {
        if (e.weight == 0.0) continue;
        if (!merged.empty() && merged.back().to == e.to) {
            merged.back().weight += e.weight;
        } else {
            merged.push_back(e);
        }
    }
    return merged;
}

void SparseMatrix::multiply(const std::vector<double>& v, std::vector<double>& out) const {
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) s += weights[k] * v[cols[k]];
        out[i] = s;
    }
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
    SparseMatrix m;
    m.n = dense.size();
    for (const auto& row : dense) {
        if (row.size() != m.n) throw ValidationError("matrix must be square");
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (!(row[j] >= 0.0) || !std::isfinite(row[j])) throw ValidationError("matrix entries must be finite and nonnegative");
            if (row[j] > 0.0) {
                m.cols.push_back(static_cast<std::uint32_t>(j));
                m.weights.push_back(row[j]);
            }
        }
        m.offsets.push_back(m.cols.size());
    }
    return m;
}

Truncation Truncation::breadth_first(const ExpectationKernel& kernel, StateIndex root, int max_depth, std::size_t cap) {
    Truncation t;
    std::vector<std::vector<KernelEntry>> rows;
    t.states_.push_back(root);
    t.index_.emplace(root, 0);
    t.depths_.push_back(0);
    for (std::size_t head = 0; head < t.states_.size(); ++head) {
        rows.push_back(kernel.row(t.states_[head]));
        if (t.depths_[head] >= max_depth) continue;
        for (const auto& e : rows.back()) {
            if (t.index_.contains(e.to)) continue;
            if (t.states_.size() >= cap) {
                throw TruncationOverflow("truncation exceeded " + std::to_string(cap) + " states");
            }
            t.index_.emplace(e.to, static_cast<std::uint32_t>(t.states_.size()));
            t.states_.push_back(e.to);
            t.depths_.push_back(t.depths_[head] + 1);
        }
    }
    t.matrix_.n = t.states_.size();
    for (const auto& row : rows) {
        for (const auto& e : row) {
            auto it = t.index_.find(e.to);
            if (it == t.index_.end()) continue;
            t.matrix_.cols.push_back(it->second);
            t.matrix_.weights.push_back(e.weight);
        }
        t.matrix_.offsets.push_back(t.matrix_.cols.size());
    }
    return t;
}

std::int64_t Truncation::local(StateIndex s) const {
    auto it = index_.find(s);
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

Truncation Truncation::restricted(const std::vector<std::uint32_t>& keep) const {
    Truncation t;
    std::vector<std::int64_t> relabel(size(), -1);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        relabel[keep[k]] = static_cast<std::int64_t>(k);
        t.states_.push_back(states_[keep[k]]);
        t.index_.emplace(states_[keep[k]], static_cast<std::uint32_t>(k));
        t.depths_.push_back(depths_[keep[k]]);
    }
    t.matrix_.n = keep.size();
    for (std::uint32_t i : keep) {
        for (std::size_t k = matrix_.offsets[i]; k < matrix_.offsets[i + 1]; ++k) {
            if (relabel[matrix_.cols[k]] < 0) continue;
            t.matrix_.cols.push_back(static_cast<std::uint32_t>(relabel[matrix_.cols[k]]));
            t.matrix_.weights.push_back(matrix_.weights[k]);
        }
        t.matrix_.offsets.push_back(t.matrix_.cols.size());
    }
    return t;
}

namespace {

std::vector<char> reachable(const SparseMatrix& m, std::uint32_t node, bool forward) {
    std::vector<std::vector<std::uint32_t>> reverse;
    if (!forward) {
        reverse.resize(m.n);
        for (std::uint32_t i = 0; i < m.n; ++i) {
            for (std::size_t k = m.offsets[i]; k < m.offsets[i + 1]; ++k) reverse[m.cols[k]].push_back(i);
        }
    }
    std::vector<char> seen(m.n, 0);
    std::vector<std::uint32_t> stack{node};
    seen[node] = 1;
    while (!stack.empty()) {
        const std::uint32_t i = stack.back();
        stack.pop_back();
        auto visit = [&](std::uint32_t j) {
            if (!seen[j]) {
                seen[j] = 1;
                stack.push_back(j);
            }
        };
        if (forward) {
            for (std::size_t k = m.offsets[i]; k < m.offsets[i + 1]; ++k) visit(m.cols[k]);
        } else {
            for (std::uint32_t j : reverse[i]) visit(j);
        }
    }
    return seen;
}

}  // namespace

std::vector<std::uint32_t> strongly_connected_component(const SparseMatrix& m, std::uint32_t node) {
    const auto fwd = reachable(m, node, true);
    const auto bwd = reachable(m, node, false);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < m.n; ++i) {
        if (fwd[i] && bwd[i]) out.push_back(i);
    }
    return out;
}

std::vector<ScaledMass> scaled_mass_sequence(const ExpectationKernel& kernel, StateIndex start, int n,
                                             std::size_t cap) {
    std::vector<ScaledMass> masses;
    masses.reserve(static_cast<std::size_t>(n) + 1);
    std::unordered_map<StateIndex, std::vector<KernelEntry>> rows;
    std::unordered_map<StateIndex, double> current{{start, 1.0}}, next;
    int scale = 0;
    masses.push_back({1.0, 0});
    for (int k = 1; k <= n; ++k) {
        next.clear();
        for (const auto& [x, w] : current) {
            auto it = rows.find(x);
            if (it == rows.end()) {
                if (rows.size() >= cap) throw TruncationOverflow("reachable set exceeded " + std::to_string(cap) + " states");
                it = rows.emplace(x, kernel.row(x)).first;
            }
            for (const auto& e : it->second) next[e.to] += w * e.weight;
        }
        current.swap(next);
        double total = 0.0;
        for (const auto& [x, w] : current) total += w;
        if (total == 0.0) {
            masses.resize(static_cast<std::size_t>(n) + 1, ScaledMass{0.0, 0});
            return masses;
        }
        masses.push_back({total, scale});
        // Renormalize by an exact power of two so the represented values are unchanged.
        int exponent = 0;
        std::frexp(total, &exponent);
        if (exponent > 64 || exponent < -64) {
            for (auto& [x, w] : current) w = std::ldexp(w, -exponent);
            scale += exponent;
        }
    }
    return masses;
}

std::vector<double> log_mass_sequence(const ExpectationKernel& kernel, StateIndex start, int n, std::size_t cap) {
    std::vector<double> logs;
    for (const auto& m : scaled_mass_sequence(kernel, start, n, cap)) {
        logs.push_back(m.mantissa == 0.0 ? -std::numeric_limits<double>::infinity()
                                         : std::log(m.mantissa) + m.binary_scale * std::log(2.0));
    }
    return logs;
}

}  // namespace branchlab
