#pragma once

#include <functional>
#include <string>
#include <vector>

namespace themekit {

std::string read_file(const std::string& path);        // ConfigError when unreadable
void write_file(const std::string& path, const std::string& content);
void ensure_directory(const std::string& path);

std::string trim(const std::string& s);
std::string lowercase(std::string s);
std::vector<std::string> split_whitespace(const std::string& s);

// Runs fn(0..count-1) on at most max_in_flight worker threads. The first
// exception thrown by any worker is rethrown on the calling thread after all
// workers finish.
void parallel_for_indexed(std::size_t count, int max_in_flight,
                          const std::function<void(std::size_t)>& fn);

}  // namespace themekit
