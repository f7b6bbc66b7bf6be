// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <cstdint>
#include <functional>
#include <limits>

namespace clinlogic {

// Dense insertion-order identifiers.
enum class NodeId : std::uint32_t {};
enum class EdgeId : std::uint32_t {};

constexpr std::uint32_t index(NodeId id) noexcept { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t index(EdgeId id) noexcept { return static_cast<std::uint32_t>(id); }

using KindId = std::uint16_t;
using RelationId = std::uint16_t;
using Timestamp = std::int64_t;  // seconds since epoch
using Duration = std::int64_t;   // seconds

constexpr Duration kUnboundedWindow = std::numeric_limits<Duration>::max();

}  // namespace clinlogic
