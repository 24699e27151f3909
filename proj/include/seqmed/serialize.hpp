#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>

#include "seqmed/seq_lapmed.hpp"
#include "seqmed/seq_med.hpp"

namespace seqmed {

inline constexpr int kModelFormatVersion = 1;

/// Malformed, truncated or incompatible model file.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using AnyModel = std::variant<SeqMedModel, SeqLapMedModel>;

std::string model_to_json(const SeqMedModel& model);
std::string model_to_json(const SeqLapMedModel& model);
AnyModel model_from_json(const std::string& text);

void save_model(const SeqMedModel& model, const std::filesystem::path& path);
void save_model(const SeqLapMedModel& model, const std::filesystem::path& path);
void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

/// Dispatch helpers over either model type.
Vector decision_values(const AnyModel& model, const Matrix& X);
FitReport partial_fit(AnyModel& model, const Batch& batch);
int model_time(const AnyModel& model);
std::size_t support_vector_count(const AnyModel& model);

}  // namespace seqmed
