#pragma once

#include <string>

#include <json.hpp>

#include "lct/data.hpp"
#include "lct/sampler.hpp"
#include "lct/trainer.hpp"

namespace lct {

using json = nlohmann::json;

// Distributions serialize to their "L(a,b,h_b)" string form; bare numbers
// are point masses. Accepts either a string or a number on input.
json pdf_to_json(const LinearPdf& pdf);
LinearPdf pdf_from_json(const json& j);

json mapping_to_json(const LambdaMapping& m);
LambdaMapping mapping_from_json(const json& j);

json optimizer_to_json(const OptimizerConfig& oc);
OptimizerConfig optimizer_from_json(const json& j);

json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const json& j);

json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const json& j);

json scalars_to_json(const EvalScalars& s);
EvalScalars scalars_from_json(const json& j);

// Model checkpoint: format_version, architecture dims, flat parameter
// vector, training configuration, imbalance ratio, loss curve, and the
// standardization stats needed to score fresh data. Doubles round-trip
// bit-exactly through the JSON encoding.
json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const json& j);

void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

json load_json_file(const std::string& path);
void write_json_file(const json& j, const std::string& path);

} // namespace lct
