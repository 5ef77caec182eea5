#pragma once

#include "bmol/bmo.hpp"
#include "bmol/carleson.hpp"
#include "bmol/decompose.hpp"
#include "bmol/dyadic.hpp"
#include "bmol/space.hpp"

#include <json.hpp>

#include <string>

namespace bmol {

using ordered_json = nlohmann::ordered_json;

ordered_json space_to_json(const Space& space);
Space space_from_json(const ordered_json& j);

ordered_json system_to_json(const DyadicSystem& system);
ordered_json forest_to_json(const StoppingForest& forest);
ordered_json decomposition_to_json(const Decomposition& dec);

std::string tail_curve_csv(const TailCurve& curve);
std::string sigma_csv(const CarlesonMeasure& sigma);
std::string history_csv(const std::vector<IterationRow>& rows);
std::string kernel_csv(const Eigen::MatrixXd& kernel);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace bmol
