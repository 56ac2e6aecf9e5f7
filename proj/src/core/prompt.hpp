#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "core/reward/reward.hpp"

namespace prof {

// Prompt material for reward generation: the shared instructions plus a
// task description.  The general text is arity-specialized when loaded.
struct PromptBundle {
  std::string general;
  std::string task;
};

// TextGrad-style chain templates.  The loss template compares a chosen
// and rejected program, grad extracts actionable criticism from the loss
// response, update asks for a revised program.
struct PromptTemplates {
  std::string loss;    // {query} {rejected_response} {chosen_response}
  std::string grad;    // {loss_text}
  std::string update;  // {grad_text} {variable}
};

// Layout: <dir>/general.txt, <dir>/tasks/<task>.txt, <dir>/{loss,grad,update}.txt
PromptBundle load_prompt_bundle(const std::filesystem::path& dir,
                                const std::string& task, Arity arity);
PromptTemplates load_prompt_templates(const std::filesystem::path& dir);

// Substitutes each {name} placeholder exactly once.  Unknown placeholders
// in the template, or declared ones that do not appear exactly once, are
// placeholder errors.  Substituted values are never re-scanned, so
// payloads may contain braces.
std::string render_template(
    const std::string& tmpl,
    const std::vector<std::pair<std::string, std::string>>& substitutions);

// The generation query: general text, newline, task text.
std::string build_query(const PromptBundle& bundle);

std::string render_loss(const PromptTemplates& templates,
                        const std::string& query, const std::string& chosen,
                        const std::string& rejected);
std::string render_grad(const PromptTemplates& templates,
                        const std::string& loss_text);
std::string render_update(const PromptTemplates& templates,
                          const std::string& grad_text,
                          const std::string& variable);

}  // namespace prof
