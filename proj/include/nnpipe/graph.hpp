#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nnpipe {

class ElementRegistry;

struct SourcePosition {
  std::size_t line = 1;
  std::size_t column = 1;
};

struct ElementDecl {
  std::string kind;
  std::string name;
  // In source order, without name=.
  std::vector<std::pair<std::string, std::string>> properties;
  SourcePosition position;

  std::optional<std::string> property(const std::string& key) const;
};

struct LinkDecl {
  std::string from;
  std::string from_pad;  // empty: next free or new request pad
  std::string to;
  std::string to_pad;
  std::string caps;  // caps literal on the link, empty when none
};

// Parsed pipeline description: element declarations and pad links.
//
//   pipeline := branch { branch }
//   branch   := node { "!" node }
//   node     := element | caps | ref
//   element  := KIND { KEY "=" VALUE }
//   ref      := NAME "." [PAD]
//
// A caps literal between two nodes constrains that link. Unnamed elements
// are called kind + counter (queue0, queue1, ...).
class PipelineGraph {
 public:
  std::vector<ElementDecl> elements;
  std::vector<LinkDecl> links;

  // Checks kinds and property names against `registry` (the process-wide
  // one by default); pass nullptr to skip.
  static PipelineGraph parse(std::string_view text, const ElementRegistry* registry);
  static PipelineGraph parse(std::string_view text);

  // Text that parses back to an identical graph.
  std::string serialize() const;

  const ElementDecl* find(const std::string& name) const;
  ElementDecl* find(const std::string& name);

  // Throws ValidationError listing the element names of a link cycle.
  void check_acyclic() const;
  // Element names with every element after all its upstream elements.
  std::vector<std::string> topological_order() const;

  friend bool operator==(const PipelineGraph& a, const PipelineGraph& b);
};

bool operator==(const ElementDecl& a, const ElementDecl& b);
bool operator==(const LinkDecl& a, const LinkDecl& b);

// GraphViz text; `label` may supply an edge label per link index.
std::string export_dot(const PipelineGraph& graph,
                       const std::function<std::string(std::size_t)>& label = {});

// Quotes a property value when it cannot stand as a bare token.
std::string quote_value(const std::string& value);

}  // namespace nnpipe
