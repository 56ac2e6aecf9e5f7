#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

#include "core/reward/reward.hpp"

namespace prof {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool acceptable_label(const std::string& label) {
  return label.empty() || label == "python" || label == "reward" ||
         label == "text";
}

}  // namespace

std::string extract_code_block(const std::string& response) {
  std::istringstream in(response);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }

  std::string best;
  bool found = false;
  size_t i = 0;
  while (i < lines.size()) {
    std::string t = trim(lines[i]);
    if (t.rfind("```", 0) != 0) {
      ++i;
      continue;
    }
    std::string label = lower(trim(t.substr(3)));
    size_t j = i + 1;
    while (j < lines.size() && trim(lines[j]).rfind("```", 0) != 0) ++j;
    if (j >= lines.size()) break;  // unterminated fence: ignore
    if (acceptable_label(label)) {
      std::string body;
      for (size_t k = i + 1; k < j; ++k) {
        body += lines[k];
        body.push_back('\n');
      }
      best = std::move(body);  // keep the last acceptable block
      found = true;
    }
    i = j + 1;
  }
  if (!found)
    raise(Errc::extraction, "response contains no usable fenced code block");
  return best;
}

}  // namespace prof
