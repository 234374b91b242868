#pragma once

#include <string>

#include "coaplan/knowledge_base.hpp"
#include "coaplan/plan.hpp"
#include "coaplan/scenario.hpp"

namespace coaplan::testing {

inline const KnowledgeBase& shipped_kb() {
  static const KnowledgeBase kb =
      KnowledgeBase::load({COAPLAN_DATA_DIR "/kb/base.yaml", COAPLAN_DATA_DIR "/kb/nation-b.yaml"});
  return kb;
}

inline Scenario shipped_scenario(const std::string& name) {
  return load_scenario(std::string(COAPLAN_DATA_DIR "/scenarios/") + name + ".yaml");
}

// Leaves in the subtree rooted at `id`, the root included if it is a leaf.
inline std::vector<const Activity*> subtree_leaves(const Plan& p, const std::string& id) {
  std::vector<const Activity*> out;
  std::vector<std::string> stack{id};
  while (!stack.empty()) {
    const Activity& a = p.activity(stack.back());
    stack.pop_back();
    if (a.leaf) out.push_back(&a);
    for (const auto& c : a.children) stack.push_back(c);
  }
  return out;
}

}  // namespace coaplan::testing
