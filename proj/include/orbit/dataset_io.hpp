#pragma once

// On-disk datasets. A dataset directory holds manifest.json plus one payload
// file per split. Multiclass payloads are CSV rows "label,x_1,...,x_p" with
// shortest round-trip decimals; sequence payloads (alignment, vowel, GMM
// utterances) use a little-endian binary layout described in the manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbit/gmm_hmm.hpp"
#include "orbit/tasks/alignment.hpp"
#include "orbit/tasks/multiclass.hpp"
#include "orbit/tasks/vowel.hpp"

namespace orbit {

enum class TaskKind { Multiclass, Alignment, Vowel, Gmm };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// FNV-1a of the file bytes as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed with sorted keys and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

void write_multiclass_csv(const std::filesystem::path& path, const Dataset<MulticlassTask>& data);
/// Throws DIM_MISMATCH when a row does not have input_dim features.
Dataset<MulticlassTask> read_multiclass_csv(const std::filesystem::path& path, int input_dim);

void write_alignment_bin(const std::filesystem::path& path, const Dataset<AlignmentTask>& data);
Dataset<AlignmentTask> read_alignment_bin(const std::filesystem::path& path);

void write_vowel_bin(const std::filesystem::path& path, const Dataset<VowelTask>& data);
Dataset<VowelTask> read_vowel_bin(const std::filesystem::path& path);

void write_utterances_bin(const std::filesystem::path& path, const std::vector<Utterance>& data);
std::vector<Utterance> read_utterances_bin(const std::filesystem::path& path);

/// Description of the binary layout, recorded in manifests.
nlohmann::json binary_layout_json(TaskKind kind);

}  // namespace orbit
