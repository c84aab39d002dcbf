#pragma once

#include "smocklab/analysis.hpp"
#include "smocklab/design.hpp"
#include "smocklab/io.hpp"

#include <optional>

namespace smocklab {

struct Simulation {
  SmockingPattern pattern;
  PipelineParams params;
  SmockedDesign design;
  std::optional<ConstraintReport> report;
};

/// Parameters from the document's "params" with `overrides` applied on top.
PipelineParams resolve_params(const PatternDocument& doc, const Json& overrides);

/// Shared driver behind the CLI and the service: materialize, run the
/// pipeline up to `stop`, and classify the underlay.
Simulation simulate(const PatternDocument& doc, const Json& overrides, Stage stop, const StageSeed& seed = {});

}  // namespace smocklab
