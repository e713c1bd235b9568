#include "branchlab/motion.hpp"

#include <cmath>

namespace branchlab {

bool Interval::contains(double x) const {
    const bool left_ok = left_boundary == Boundary::dirichlet ? x > left : x >= left;
    const bool right_ok = right_boundary == Boundary::dirichlet ? x < right : x <= right;
    return left_ok && right_ok;
}

bool Interval::bounded() const { return std::isfinite(left) && std::isfinite(right); }

double CtmcRates::exit_rate(int state) const {
    double total = 0.0;
    for (const auto& [to, rate] : jumps[static_cast<std::size_t>(state)]) total += rate;
    return total;
}

MotionSpec MotionSpec::brownian(Interval domain, double drift, double diffusion) {
    MotionSpec m;
    m.domain = domain;
    m.drift = drift;
    m.diffusion = diffusion;
    return m;
}

void MotionSpec::validate() const {
    if (!(domain.left < domain.right)) throw ValidationError("motion domain needs left < right");
    if (!std::isfinite(domain.left) && domain.left_boundary != Boundary::open) {
        throw ValidationError("an infinite domain end must be open");
    }
    if (!std::isfinite(domain.right) && domain.right_boundary != Boundary::open) {
        throw ValidationError("an infinite domain end must be open");
    }
    switch (kind) {
        case MotionKind::diffusion_1d:
        case MotionKind::diffusion_radial:
            if (!(diffusion.lower() > 0.0)) throw ValidationError("diffusion coefficient must be uniformly positive");
            if (!std::isfinite(diffusion.upper()) || !std::isfinite(drift.lower()) || !std::isfinite(drift.upper())) {
                throw ValidationError("drift and diffusion need finite declared bounds");
            }
            if (kind == MotionKind::diffusion_radial) {
                if (dimension < 2) throw ValidationError("radial motion needs dimension >= 2");
                if (domain.left != 0.0) throw ValidationError("radial domain starts at radius 0");
            }
            break;
        case MotionKind::ctmc:
            if (ctmc.jumps.empty()) throw ValidationError("ctmc motion needs at least one state");
            for (const auto& row : ctmc.jumps) {
                for (const auto& [to, rate] : row) {
                    if (!(rate >= 0.0) || !std::isfinite(rate)) throw ValidationError("ctmc rates must be finite and nonnegative");
                    if (to >= static_cast<int>(ctmc.jumps.size())) throw ValidationError("ctmc jump target out of range");
                }
            }
            break;
    }
}

MotionStepper::MotionStepper(const MotionSpec& spec) : spec_(&spec) {
    spec.validate();
}

bool MotionStepper::advance(double& x, double h, RandomSource& rng) const {
    if (h <= 0.0) return true;
    switch (spec_->kind) {
        case MotionKind::diffusion_1d: return advance_diffusion(x, h, rng);
        case MotionKind::diffusion_radial: return advance_radial(x, h, rng);
        case MotionKind::ctmc: return advance_ctmc(x, h, rng);
    }
    return true;
}

bool MotionStepper::survives_bridge(double x0, double x1, double a, double h, RandomSource& rng) const {
    const auto& d = spec_->domain;
    double kill = 0.0;
    if (d.left_boundary == Boundary::dirichlet) kill += std::exp(-2.0 * (x0 - d.left) * (x1 - d.left) / (a * h));
    if (d.right_boundary == Boundary::dirichlet) kill += std::exp(-2.0 * (d.right - x0) * (d.right - x1) / (a * h));
    return kill == 0.0 || rng.uniform() >= kill;
}

bool MotionStepper::advance_diffusion(double& x, double h, RandomSource& rng) const {
    const auto& d = spec_->domain;
    const double a = spec_->diffusion(x);
    const double x1 = x + spec_->drift(x) * h + std::sqrt(a * h) * rng.normal();
    double y = x1;
    // Mirror into the domain; a loop covers steps longer than the domain.
    for (int k = 0; k < 64; ++k) {
        if (y < d.left && d.left_boundary == Boundary::reflecting) {
            y = 2.0 * d.left - y;
        } else if (y > d.right && d.right_boundary == Boundary::reflecting) {
            y = 2.0 * d.right - y;
        } else {
            break;
        }
    }
    if (!d.contains(y)) return false;
    if (!survives_bridge(x, y, a, h, rng)) return false;
    x = y;
    return true;
}

bool MotionStepper::advance_radial(double& x, double h, RandomSource& rng) const {
    const auto& d = spec_->domain;
    const double a = spec_->diffusion(x);
    const double sd = std::sqrt(a * h);
    // Step the d-dimensional vector (x, 0, ..., 0) and take its norm.
    const double first = x + spec_->drift(x) * h + sd * rng.normal();
    double sq = first * first;
    for (int i = 1; i < spec_->dimension; ++i) {
        const double z = sd * rng.normal();
        sq += z * z;
    }
    double y = std::sqrt(sq);
    if (y > d.right && d.right_boundary == Boundary::reflecting) y = 2.0 * d.right - y;
    if (!(y < d.right) && d.right_boundary == Boundary::dirichlet) return false;
    if (d.right_boundary == Boundary::dirichlet) {
        const double p = std::exp(-2.0 * (d.right - x) * (d.right - y) / (a * h));
        if (rng.uniform() < p) return false;
    }
    x = std::max(y, 0.0);
    return true;
}

bool MotionStepper::advance_ctmc(double& x, double h, RandomSource& rng) const {
    int state = static_cast<int>(x);
    double left = h;
    while (true) {
        const double rate = spec_->ctmc.exit_rate(state);
        const double wait = rng.exponential(rate);
        if (wait >= left) break;
        left -= wait;
        double u = rng.uniform() * rate;
        int target = state;
        for (const auto& [to, r] : spec_->ctmc.jumps[static_cast<std::size_t>(state)]) {
            target = to;
            if (u < r) break;
            u -= r;
        }
        if (target < 0) return false;
        state = target;
    }
    x = state;
    return true;
}

}  // namespace branchlab
