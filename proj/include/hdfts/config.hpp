#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hdfts/mc.hpp"
#include "hdfts/spectral.hpp"

namespace hdfts {

// configuration problems carry the offending JSON path or parse position
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json parse_json_file(const std::string& path);

// every reader rejects unknown keys and validates values before returning
BasisSpec basis_from_json(const nlohmann::json& j, const std::string& path);
ErrorSpec error_spec_from_json(const nlohmann::json& j, int basis_size,
                               const std::string& path);
BlockKernel kernel_from_json(const nlohmann::json& j, const BasisSpec& rb, const BasisSpec& cb,
                             int rows, int cols, const std::string& path);
MAProcessSpec ma_spec_from_json(const nlohmann::json& j, const std::string& path);
MixedProcessSpec mixed_spec_from_json(const nlohmann::json& j, const std::string& path);
JointProcessSpec joint_spec_from_json(const nlohmann::json& j, const std::string& path);
FllrScenario fllr_scenario_from_json(const nlohmann::json& j, const std::string& path);
PflrScenario pflr_scenario_from_json(const nlohmann::json& j, const std::string& path);
TruncationRule truncation_from_json(const nlohmann::json& j, const std::string& path);
StudyConfig study_config_from_json(const nlohmann::json& j, const std::string& path = "$");

nlohmann::json stability_report_to_json(const StabilityReport& report);
nlohmann::json study_result_summary(const StudyConfig& cfg, const StudyResult& result);

}  // namespace hdfts
