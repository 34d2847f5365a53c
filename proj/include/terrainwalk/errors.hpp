#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace terrainwalk {

// Domain violation in the step dynamics. Planners treat any of these as an
// infeasible trial point; rollout() annotates the failing step index.
class DynamicsError : public std::runtime_error {
public:
    enum class Kind {
        negative_pushoff,
        fall_backward,          // post-transition speed cannot crest the stance leg
        insufficient_momentum,  // stance cannot reach the landing configuration
        midstance_unreachable,  // stance never passes vertical
        terrain_too_steep,      // |height difference| >= step length
    };

    DynamicsError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }
    std::optional<int> step_index() const noexcept { return step_; }
    void annotate_step(int index) { step_ = index; }

private:
    Kind kind_;
    std::optional<int> step_;
};

// Terrain file syntax or structure problem; 1-based line/column.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", col " +
                             std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

// Speed-series ingestion/validation problem.
class SeriesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Planner-level failure (e.g. a per-step root find with no admissible push-off).
class PlanError : public std::runtime_error {
public:
    PlanError(const std::string& what, std::optional<int> step = {})
        : std::runtime_error(what), step_(step) {}
    std::optional<int> step_index() const noexcept { return step_; }

private:
    std::optional<int> step_;
};

}  // namespace terrainwalk
