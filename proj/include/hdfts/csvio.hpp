#pragma once

#include <string>
#include <vector>

#include "hdfts/fllr.hpp"
#include "hdfts/fpca.hpp"
#include "hdfts/mc.hpp"
#include "hdfts/pflr.hpp"

namespace hdfts {

inline constexpr const char* kVersion = "0.1.0";

// shortest round-trippable decimal representation
std::string fmt_double(double v);

// temp-file-plus-rename so failed runs leave no partial outputs
void atomic_write(const std::string& path, const std::string& content);

std::string panel_csv(const FunctionalPanel& panel);
std::string records_csv(const std::vector<StudyRecord>& records);
std::string stability_csv(const StabilityReport& report);
std::string eigenvalues_csv(const EigenSystem& es);
std::string scores_csv(const EigenSystem& es);
std::string curve_csv(const Curve& c);
std::string kernel_csv(const OperatorKernel& k);
std::string fllr_surfaces_csv(const FllrFit& fit);
std::string fllr_path_csv(const std::vector<FllrFit>& fits);
std::string pflr_curves_csv(const PflrFit& fit);

}  // namespace hdfts
