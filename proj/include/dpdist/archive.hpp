#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dpdist/mlp.hpp"

namespace dpdist {

/// DPD1 model archive: little-endian, 64-bit counts, float32 tensors,
/// trailing CRC-32 over every preceding byte.
///
///   "DPD1" | u32 version
///   u64 k | u64 F | u64 K | f64 sigma | u64 H | u64 width[H]
///   u64 n | f32 input_mean[n] | f32 input_scale[n]
///   per layer: u64 in | u64 out | u8 bn | f32 W[out*in] | f32 b[out]
///              [bn: f32 gamma[out] | beta[out] | running_mean[out] | running_var[out]]
///   u64 steps | u64 seed | u32 crc32
inline constexpr std::uint32_t kArchiveVersion = 1;

std::vector<std::uint8_t> serialize_model(const MlpModel& model);
/// Throws FormatError (magic, version, shape) or IntegrityError (truncation,
/// checksum). Loaded models are in inference mode.
MlpModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace dpdist
