#include "smocklab/runner.hpp"

#include "smocklab/error.hpp"

namespace smocklab {

PipelineParams resolve_params(const PatternDocument& doc, const Json& overrides) {
  PipelineParams params = parse_params(doc.params);
  if (!overrides.is_null()) params = parse_params(overrides, params, "/params");
  return params;
}

Simulation simulate(const PatternDocument& doc, const Json& overrides, Stage stop, const StageSeed& seed) {
  Simulation sim;
  sim.params = resolve_params(doc, overrides);
  sim.pattern = materialize(doc);
  sim.design = full_pipeline(sim.pattern, sim.params, stop, seed);
  if (sim.pattern.lines.size() >= 2) {
    try {
      sim.report = classify_pattern(sim.pattern, sim.params.embed);
    } catch (const Error&) {
      sim.report.reset();
    }
  }
  return sim;
}

}  // namespace smocklab
