#pragma once

#include <cstdint>
#include <string>

#include "tenprop/stt.hpp"

namespace tenprop::ser {

// Versioned little-endian container for a trained kernel model ("QSTT"):
// header carries version, dtype, config hash, component count, basis size,
// memory depth, bond schedule, and per-component domains; the payload is the
// coefficient stacks of every linking set in slot order, k-major and row-major
// within each matrix.
void save_kernel(const std::string& path, const stt::KernelModel& km);
stt::KernelModel load_kernel(const std::string& path);

std::string curve_csv(const stt::TrainResult& r);

std::string hash_hex(std::uint64_t h);

// Fixture and data files start with "# config_hash=<hex>".
std::string fixture_header(std::uint64_t config_hash);

std::string read_file(const std::string& path);                     // ConfigError if unreadable
void write_file(const std::string& path, const std::string& text);  // ResourceError on failure

}  // namespace tenprop::ser
