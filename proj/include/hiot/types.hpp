#pragma once

#include <chrono>
#include <cstdint>
#include <map>

namespace hiot {

using MoteId = std::uint32_t;
using Millis = std::chrono::milliseconds;

enum class Label : std::uint8_t { Benign = 0, Malicious = 1 };

inline double to_double(Label label) { return label == Label::Malicious ? 1.0 : 0.0; }

/// Client mote id -> label. The server never appears.
using GroundTruth = std::map<MoteId, Label>;

inline double to_seconds(Millis t) { return static_cast<double>(t.count()) / 1000.0; }

}  // namespace hiot
