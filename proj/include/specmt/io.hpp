#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace specmt::io {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, fsyncs, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

/// Appends `line` plus '\n' in a single write and fsyncs.
void append_line_durable(const std::filesystem::path& path, std::string_view line);

/// Escapes backslash, tab, CR and LF so a value fits in one TSV field.
std::string tsv_escape(std::string_view s);
std::string tsv_unescape(std::string_view s);

/// Lines of a text file with line endings normalized; a trailing empty line
/// produced by a final newline is dropped.
std::vector<std::string> lines(std::string_view content);

}  // namespace specmt::io
