#pragma once

#include <filesystem>

#include "core/trajectory.hpp"

namespace prof {

enum class DatasetFormat { kAuto, kBinaryV1, kTextLines };

// Parses a format name ("binary-v1", "text-lines", "auto").
DatasetFormat dataset_format_from_name(const std::string& name);

// binary-v1: "PTDS1\n" magic, u64le header length, JSON header
// {version, obs_dim, act_dim, has_rewards, layout, lengths}, then per
// trajectory raw float32le states/actions/rewards.
//
// text-lines: one JSON object per line with "observations" ((L+1) rows),
// "actions" (L rows) and optional "rewards" (L numbers).  Episode
// (matrix-layout) data only.
Dataset load_dataset(const std::filesystem::path& path,
                     DatasetFormat format = DatasetFormat::kAuto);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  DatasetFormat format = DatasetFormat::kBinaryV1);

}  // namespace prof
