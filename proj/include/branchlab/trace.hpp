#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace branchlab {

enum class Terminator { horizon, extinct, cap_hit };

std::string_view to_string(Terminator t);

/// Population counts N at ascending time stamps (generation index or real time).
/// Once a count is 0 every later count is 0.
struct PopulationTrace {
    std::vector<double> times;
    std::vector<std::uint64_t> counts;
    Terminator terminator = Terminator::horizon;

    void record(double t, std::uint64_t n) {
        times.push_back(t);
        counts.push_back(n);
    }
    std::uint64_t final_count() const { return counts.empty() ? 0 : counts.back(); }
    /// Alive at the end of the run, or stopped at the population cap.
    bool survived() const { return terminator != Terminator::extinct; }

    friend bool operator==(const PopulationTrace&, const PopulationTrace&) = default;
};

}  // namespace branchlab
