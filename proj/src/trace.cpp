#include "branchlab/trace.hpp"

namespace branchlab {

std::string_view to_string(Terminator t) {
    switch (t) {
        case Terminator::horizon: return "horizon";
        case Terminator::extinct: return "extinct";
        case Terminator::cap_hit: return "cap_hit";
    }
    return "unknown";
}

}  // namespace branchlab
