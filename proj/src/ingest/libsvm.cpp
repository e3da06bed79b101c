#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>

#include "chicle/errors.hpp"
#include "chicle/ingest.hpp"

namespace chicle {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

float parse_label(std::string_view token, std::size_t line) {
  double label = 0.0;
  if (!parse_number(token, label)) throw ParseError(line, "non-numeric label '" + std::string(token) + "'");
  if (label == 1.0) return 1.0f;
  if (label == -1.0 || label == 0.0) return -1.0f;
  throw ParseError(line, "label must be -1, 0 or +1, got '" + std::string(token) + "'");
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<std::uint64_t> num_features) {
  Dataset data;
  std::uint64_t max_feature = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    LabeledExample ex;
    std::size_t pos = 0;
    bool have_label = false;
    std::uint64_t prev_index = 0;
    while (pos < line.size()) {
      const auto end = line.find_first_of(" \t", pos);
      const auto token = line.substr(pos, end == std::string_view::npos ? line.size() - pos : end - pos);
      pos = end == std::string_view::npos ? line.size() : line.find_first_not_of(" \t", end);
      if (pos == std::string_view::npos) pos = line.size();
      if (token.empty()) continue;

      if (!have_label) {
        ex.label = parse_label(token, line_no);
        have_label = true;
        continue;
      }
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, "expected idx:val, got '" + std::string(token) + "'");
      std::int64_t index = 0;
      if (!parse_number(token.substr(0, colon), index))
        throw ParseError(line_no, "non-numeric feature index in '" + std::string(token) + "'");
      if (index <= 0) throw ParseError(line_no, "feature indices are 1-based, got " + std::to_string(index));
      if (static_cast<std::uint64_t>(index) <= prev_index)
        throw ParseError(line_no, "feature indices must be strictly increasing");
      if (static_cast<std::uint64_t>(index) > UINT32_MAX) throw ParseError(line_no, "feature index exceeds 2^32");
      float value = 0.0f;
      if (!parse_number(token.substr(colon + 1), value) || !std::isfinite(value))
        throw ParseError(line_no, "non-numeric feature value in '" + std::string(token) + "'");
      prev_index = static_cast<std::uint64_t>(index);
      ex.datapoints.push_back({static_cast<std::uint32_t>(index - 1), value});
    }
    max_feature = std::max(max_feature, prev_index);
    data.examples.push_back(std::move(ex));
  }
  if (data.examples.empty()) throw ParseError(line_no, "empty dataset");

  data.num_features = max_feature;
  if (num_features) {
    if (*num_features < max_feature)
      throw ParseError(line_no, "--features " + std::to_string(*num_features) +
                                    " is smaller than the largest index " + std::to_string(max_feature));
    data.num_features = *num_features;
  }
  return data;
}

Dataset load_libsvm(const std::filesystem::path& path, std::optional<std::uint64_t> num_features) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return parse_libsvm(in, num_features);
}

}  // namespace chicle
