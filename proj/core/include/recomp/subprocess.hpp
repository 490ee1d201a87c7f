#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace recomp {

struct RunResult {
    int exit_code = -1;
    std::string output; // captured stdout (empty when redirected to a file)
    std::string error;  // captured stderr
};

/// Spawn argv[0] with the given arguments, capture stderr, and either
/// capture stdout into RunResult::output or redirect it to stdout_file.
/// Throws Error(Io) when the process cannot be spawned at all.
RunResult run_process(const std::vector<std::string>& argv,
                      const std::optional<std::filesystem::path>& stdout_file = std::nullopt);

} // namespace recomp
