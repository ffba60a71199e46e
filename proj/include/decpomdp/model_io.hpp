#pragma once

#include <string>

#include "decpomdp/model.hpp"
#include "decpomdp/seqform.hpp"

namespace decpomdp {

/// Model file format (JSON): keys name, agents (list of {actions,
/// observations}), states, start, transitions [s][a_joint][s'],
/// observations_fn [a_joint][s'][o_joint], rewards [s][a_joint], horizon.
/// Joint indices are row-major over agents with agent 1 slowest.
/// docs/model_format.md carries the schema.
DecPomdp read_model_file(const std::string& path);
DecPomdp read_model_json(const std::string& text);
std::string write_model_json(const DecPomdp& model);
void write_model_file(const DecPomdp& model, const std::string& path);

/// Policy file format (JSON): per agent, a list of {history: [labels...],
/// weight}; omitted histories carry weight zero.
JointSequencePolicy read_policy_file(const std::string& path, const DecPomdp& model,
                                     const HistorySpace& space);
JointSequencePolicy read_policy_json(const std::string& text, const DecPomdp& model,
                                     const HistorySpace& space);
std::string write_policy_json(const JointSequencePolicy& policy, const DecPomdp& model,
                              const HistorySpace& space);
void write_policy_file(const JointSequencePolicy& policy, const DecPomdp& model,
                       const HistorySpace& space, const std::string& path);

}  // namespace decpomdp
