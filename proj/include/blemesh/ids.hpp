#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace blemesh {

enum class NodeId : std::uint32_t {};
enum class ClusterId : std::uint32_t {};

constexpr std::uint32_t raw(NodeId id) { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t raw(ClusterId id) { return static_cast<std::uint32_t>(id); }

/// The sink always carries node id 1.
constexpr NodeId kSinkId{1};

/// Cluster id held by the sink's cluster. It compares above every node-derived
/// id, so equal-sized clusters always resolve toward the sink.
constexpr ClusterId kSinkClusterId{std::numeric_limits<std::uint32_t>::max()};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << raw(id); }
inline std::ostream& operator<<(std::ostream& os, ClusterId id) { return os << raw(id); }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class SlotExhausted : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

class ScenarioInvalid : public Error {
 public:
  using Error::Error;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace blemesh
