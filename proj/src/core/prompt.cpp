#include "core/prompt.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace prof {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open prompt file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

bool placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || c == '_';
}

// Positions of every {name} token in the template.
std::vector<std::pair<size_t, std::string>> scan_placeholders(
    const std::string& tmpl) {
  std::vector<std::pair<size_t, std::string>> found;
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      ++i;
      continue;
    }
    size_t j = i + 1;
    while (j < tmpl.size() && placeholder_char(tmpl[j])) ++j;
    if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
      found.emplace_back(i, tmpl.substr(i + 1, j - i - 1));
      i = j + 1;
    } else {
      ++i;
    }
  }
  return found;
}

const char* kSasInputs =
    "Each transition provides obs (the current observation), act (the action "
    "taken) and next (the next observation).";
const char* kSsInputs =
    "Each transition provides obs (the current observation) and next (the "
    "next observation). Actions are not observable; do not reference act.";

}  // namespace

std::string render_template(
    const std::string& tmpl,
    const std::vector<std::pair<std::string, std::string>>& substitutions) {
  std::map<std::string, const std::string*> values;
  std::map<std::string, int> seen;
  for (const auto& [name, value] : substitutions) {
    if (!values.emplace(name, &value).second)
      raise(Errc::placeholder, "duplicate substitution for {" + name + "}");
    seen[name] = 0;
  }

  auto found = scan_placeholders(tmpl);
  for (const auto& [pos, name] : found) {
    auto it = seen.find(name);
    if (it == seen.end())
      raise(Errc::placeholder,
            "template contains unknown placeholder {" + name + "}");
    ++it->second;
  }
  for (const auto& [name, count] : seen) {
    if (count != 1)
      raise(Errc::placeholder, "placeholder {" + name + "} must appear exactly "
                               "once, found " + std::to_string(count));
  }

  std::string out;
  out.reserve(tmpl.size());
  size_t cursor = 0;
  for (const auto& [pos, name] : found) {
    out.append(tmpl, cursor, pos - cursor);
    out += *values.at(name);
    cursor = pos + name.size() + 2;
  }
  out.append(tmpl, cursor, tmpl.size() - cursor);
  return out;
}

PromptBundle load_prompt_bundle(const std::filesystem::path& dir,
                                const std::string& task, Arity arity) {
  if (task.empty()) raise(Errc::config, "task name is empty");
  PromptBundle bundle;
  std::string general_tmpl = read_file(dir / "general.txt");
  bundle.general = render_template(
      general_tmpl,
      {{"inputs", arity == Arity::kSas ? kSasInputs : kSsInputs}});
  bundle.task = read_file(dir / "tasks" / (task + ".txt"));
  return bundle;
}

PromptTemplates load_prompt_templates(const std::filesystem::path& dir) {
  PromptTemplates t;
  t.loss = read_file(dir / "loss.txt");
  t.grad = read_file(dir / "grad.txt");
  t.update = read_file(dir / "update.txt");
  return t;
}

std::string build_query(const PromptBundle& bundle) {
  if (bundle.general.empty()) raise(Errc::validation, "general prompt is empty");
  if (bundle.task.empty()) raise(Errc::validation, "task prompt is empty");
  return bundle.general + "\n" + bundle.task;
}

std::string render_loss(const PromptTemplates& templates,
                        const std::string& query, const std::string& chosen,
                        const std::string& rejected) {
  if (query.empty()) raise(Errc::validation, "loss query is empty");
  if (chosen.empty()) raise(Errc::validation, "chosen response is empty");
  if (rejected.empty()) raise(Errc::validation, "rejected response is empty");
  return render_template(templates.loss, {{"query", query},
                                          {"chosen_response", chosen},
                                          {"rejected_response", rejected}});
}

std::string render_grad(const PromptTemplates& templates,
                        const std::string& loss_text) {
  if (loss_text.empty()) raise(Errc::validation, "loss text is empty");
  return render_template(templates.grad, {{"loss_text", loss_text}});
}

std::string render_update(const PromptTemplates& templates,
                          const std::string& grad_text,
                          const std::string& variable) {
  if (grad_text.empty()) raise(Errc::validation, "gradient text is empty");
  if (variable.empty()) raise(Errc::validation, "variable text is empty");
  return render_template(templates.update,
                         {{"grad_text", grad_text}, {"variable", variable}});
}

}  // namespace prof
