#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace treegrad {

// Shortest decimal form that parses back to the same double.  Used everywhere
// a real number is written to disk, so serialized files round-trip exactly and
// repeated runs produce identical bytes.
std::string format_double(double v);

// Strict parse of a full token; throws std::runtime_error on trailing garbage,
// empty input, or overflow.
double parse_double(const std::string& token);
long long parse_int(const std::string& token);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& line, char sep);

// Runs fn(i) for i in [0, count) across at most thread_count threads.  Work is
// handed out by an atomic counter, so the assignment of index to thread is not
// deterministic; callers must write results into per-index slots.
void parallel_for(std::size_t count, int thread_count, const std::function<void(std::size_t)>& fn);

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// Angle between vectors in [0, pi].  A zero vector has no direction; the angle
// is defined as pi/2 so downstream averages treat it as uninformative.
double vector_angle(std::span<const double> a, std::span<const double> b);

}  // namespace treegrad
