#include "polyrom/trajectory.hpp"

#include <string>

#include "polyrom/errors.hpp"

namespace polyrom {

void Trajectory::validate() const {
    if (snapshots.cols() < 2) {
        throw InvalidInput("trajectory needs at least 2 snapshots, has " +
                           std::to_string(snapshots.cols()));
    }
    if (snapshots.rows() < 1) throw InvalidInput("trajectory snapshots are empty");
    if (!snapshots.allFinite()) throw InvalidInput("trajectory holds non-finite values");
    if (!(dt > 0.0)) throw InvalidInput("trajectory dt must be positive");
}

}  // namespace polyrom
