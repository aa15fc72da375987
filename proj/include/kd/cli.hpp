#pragma once

#include "kd/io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kd::cli {

enum ExitCode { ok = 0, verification_failed = 1, input_invalid = 2, window_overflow = 3 };

enum class Format { text, machine };

/** @brief One invocation. Optional fields fall back to the input's [job] section, then defaults. */
struct JobSpec {
    std::string command;                 // empty: taken from the [job] section
    std::string input;                   // catalogue name or file path
    std::optional<Window> window;
    Format format = Format::text;
    std::optional<int> n, m, shift;
    std::vector<std::string> lemmas;     // verify-acyclicity: spencer, koszul, de-rham
    std::optional<int> relative;         // verify-acyclicity: relative Spencer onto the first m coordinates
    std::string fixtures;
    int jobs = 1;
};

struct RunResult {
    int exit_code = ok;
    std::string out;
    std::string err;
};

const std::vector<std::string>& commands();

/** Runs a job. Never throws: failures become an exit code and a message on `err`. */
RunResult run(const JobSpec& job);

/** Pieces larger than this many trigrades are refused with a window-overflow exit. */
inline constexpr long kMaxWindowPieces = 250000;

} // namespace kd::cli
