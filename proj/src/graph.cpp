#include "nnpipe/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "nnpipe/caps.hpp"
#include "nnpipe/element.hpp"
#include "nnpipe/error.hpp"

namespace nnpipe {
namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !ident_start(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), ident_char);
}

struct Token {
  enum Kind { kBang, kWord } kind = kWord;
  std::string text;     // quotes removed, escapes resolved
  std::string raw;      // as written
  std::size_t first_quote = std::string::npos;  // index into text
  SourcePosition pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (at_end()) break;
      if (peek() == '!') {
        Token t;
        t.kind = Token::kBang;
        t.text = t.raw = "!";
        t.pos = pos_;
        advance();
        out.push_back(t);
        continue;
      }
      out.push_back(word());
    }
    return out;
  }

 private:
  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }
  void advance() {
    if (text_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  Token word() {
    Token t;
    t.pos = pos_;
    std::size_t begin = i_;
    while (!at_end() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != '!') {
      if (peek() == '"') {
        SourcePosition quote = pos_;
        if (t.first_quote == std::string::npos) t.first_quote = t.text.size();
        advance();
        bool closed = false;
        while (!at_end()) {
          char c = peek();
          if (c == '"') {
            advance();
            closed = true;
            break;
          }
          if (c == '\\' && i_ + 1 < text_.size()) {
            advance();
            c = peek();
          }
          t.text.push_back(c);
          advance();
        }
        if (!closed) throw ParseError(quote.line, quote.column, "\"", "unterminated quote");
        continue;
      }
      t.text.push_back(peek());
      advance();
    }
    t.raw = std::string(text_.substr(begin, i_ - begin));
    return t;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  SourcePosition pos_;
};

[[noreturn]] void fail(const SourcePosition& pos, const std::string& token,
                       const std::string& message) {
  throw ParseError(pos.line, pos.column, token, message);
}

struct RefNode {
  std::string name;
  std::string pad;
  SourcePosition pos;
  std::string raw;
};

struct CapsNode {
  std::string caps;
  SourcePosition pos;
  std::string raw;
};

struct ElementNode {
  std::size_t index;
};

using Node = std::variant<ElementNode, RefNode, CapsNode>;

// Link endpoint before automatic names are known.
struct End {
  std::optional<std::size_t> element;  // element index, or
  RefNode ref;                         // a named reference
};

struct PendingLink {
  End from;
  End to;
  std::string caps;
};

struct PendingElement {
  ElementDecl decl;
  std::optional<std::string> explicit_name;
  std::map<std::string, SourcePosition> property_pos;
  std::map<std::string, std::string> property_raw;
};

class Parser {
 public:
  Parser(std::string_view text, const ElementRegistry* registry)
      : tokens_(Lexer(text).run()), registry_(registry) {}

  PipelineGraph run() {
    if (tokens_.empty()) fail({1, 1}, "", "empty pipeline");
    std::vector<Node> branch;
    const Token* prev = nullptr;
    for (const auto& tok : tokens_) {
      if (tok.kind == Token::kBang) {
        if (!prev || prev->kind == Token::kBang) fail(tok.pos, "!", "unexpected '!'");
        prev = &tok;
        continue;
      }
      auto eq = tok.text.find('=');
      bool caps_like = is_caps(tok.text);
      if (!caps_like && eq != std::string::npos && eq < tok.first_quote) {
        add_property(tok, eq, branch, prev);
        prev = &tok;
        continue;
      }
      Node node = make_node(tok, caps_like);
      if (prev && prev->kind == Token::kWord) {
        finish_branch(branch);
        branch.clear();
      }
      branch.push_back(std::move(node));
      prev = &tok;
    }
    if (prev->kind == Token::kBang) {
      fail(prev->pos, "!", "unexpected end of input after '!'");
    }
    finish_branch(branch);
    return resolve();
  }

 private:
  static bool is_caps(const std::string& text) {
    if (text == "ANY") return true;
    auto head = text.substr(0, text.find(','));
    return head.find('/') != std::string::npos && head.find('=') == std::string::npos;
  }

  Node make_node(const Token& tok, bool caps_like) {
    if (caps_like) {
      try {
        StreamCaps::parse(tok.text);
      } catch (const Error& e) {
        fail(tok.pos, tok.raw, std::string("bad caps: ") + e.what());
      }
      return CapsNode{tok.text, tok.pos, tok.raw};
    }
    if (tok.first_quote != std::string::npos) fail(tok.pos, tok.raw, "unexpected quoted token");
    auto dot = tok.text.find('.');
    if (dot != std::string::npos) {
      auto name = tok.text.substr(0, dot);
      auto pad = tok.text.substr(dot + 1);
      if (!is_identifier(name) || (!pad.empty() && !is_identifier(pad))) {
        fail(tok.pos, tok.raw, "malformed reference");
      }
      return RefNode{name, pad, tok.pos, tok.raw};
    }
    if (!is_identifier(tok.text)) fail(tok.pos, tok.raw, "unexpected token");
    PendingElement e;
    e.decl.kind = tok.text;
    e.decl.position = tok.pos;
    elements_.push_back(std::move(e));
    return ElementNode{elements_.size() - 1};
  }

  void add_property(const Token& tok, std::size_t eq, const std::vector<Node>& branch,
                    const Token* prev) {
    if (branch.empty() || !prev || prev->kind == Token::kBang ||
        !std::holds_alternative<ElementNode>(branch.back())) {
      fail(tok.pos, tok.raw, "property outside an element");
    }
    auto key = tok.text.substr(0, eq);
    auto value = tok.text.substr(eq + 1);
    if (!is_identifier(key)) fail(tok.pos, tok.raw, "bad property name '" + key + "'");
    if (value.empty() && tok.first_quote == std::string::npos) {
      fail(tok.pos, tok.raw, "property '" + key + "' has no value");
    }
    auto& e = elements_[std::get<ElementNode>(branch.back()).index];
    if (e.property_pos.count(key)) fail(tok.pos, tok.raw, "property '" + key + "' set twice");
    e.property_pos[key] = tok.pos;
    if (key == "name") {
      if (!is_identifier(value)) fail(tok.pos, tok.raw, "bad element name '" + value + "'");
      for (const auto& other : elements_) {
        if (other.explicit_name == value) {
          fail(tok.pos, tok.raw, "duplicate element name '" + value + "'");
        }
      }
      e.explicit_name = value;
      return;
    }
    e.property_raw[key] = tok.raw;
    e.decl.properties.emplace_back(key, value);
  }

  void finish_branch(const std::vector<Node>& branch) {
    if (branch.empty()) return;
    if (branch.size() == 1) {
      if (auto* r = std::get_if<RefNode>(&branch[0])) fail(r->pos, r->raw, "dangling reference");
      if (auto* c = std::get_if<CapsNode>(&branch[0])) {
        fail(c->pos, c->raw, "caps literal needs elements on both sides");
      }
    }
    std::optional<End> prev;
    const CapsNode* caps = nullptr;
    for (const auto& node : branch) {
      if (auto* c = std::get_if<CapsNode>(&node)) {
        if (!prev) fail(c->pos, c->raw, "caps literal needs an upstream element");
        if (caps) fail(c->pos, c->raw, "two caps literals on one link");
        caps = c;
        continue;
      }
      End here;
      if (auto* e = std::get_if<ElementNode>(&node)) {
        here.element = e->index;
      } else {
        here.ref = std::get<RefNode>(node);
      }
      if (prev) links_.push_back(PendingLink{*prev, here, caps ? caps->caps : std::string()});
      caps = nullptr;
      prev = here;
    }
    if (caps) fail(caps->pos, caps->raw, "caps literal needs a downstream element");
  }

  PipelineGraph resolve() {
    std::set<std::string> taken;
    for (const auto& e : elements_) {
      if (e.explicit_name) taken.insert(*e.explicit_name);
    }
    std::map<std::string, std::size_t> counters;
    PipelineGraph g;
    for (auto& e : elements_) {
      if (e.explicit_name) {
        e.decl.name = *e.explicit_name;
      } else {
        std::string name;
        do {
          name = e.decl.kind + std::to_string(counters[e.decl.kind]++);
        } while (taken.count(name));
        taken.insert(name);
        e.decl.name = name;
      }
      if (registry_) {
        check_element(e);
        Properties props(e.decl.properties.begin(), e.decl.properties.end());
        try {
          registry_->check(e.decl.kind, props);
        } catch (const Error& err) {
          fail(e.decl.position, e.decl.kind, err.what());
        }
      }
      g.elements.push_back(e.decl);
    }
    auto end_name = [&](const End& end) {
      if (end.element) return elements_[*end.element].decl.name;
      if (!taken.count(end.ref.name)) {
        fail(end.ref.pos, end.ref.raw, "unknown element '" + end.ref.name + "'");
      }
      return end.ref.name;
    };
    for (const auto& l : links_) {
      LinkDecl d;
      d.from = end_name(l.from);
      d.from_pad = l.from.element ? std::string() : l.from.ref.pad;
      d.to = end_name(l.to);
      d.to_pad = l.to.element ? std::string() : l.to.ref.pad;
      d.caps = l.caps;
      g.links.push_back(std::move(d));
    }
    return g;
  }

  void check_element(const PendingElement& e) const {
    const ElementKind* kind = registry_->find(e.decl.kind);
    if (!kind) fail(e.decl.position, e.decl.kind, "unknown element kind '" + e.decl.kind + "'");
    for (const auto& [key, value] : e.decl.properties) {
      bool known = std::any_of(kind->properties.begin(), kind->properties.end(),
                               [&](const PropertySpec& s) { return s.name == key; });
      if (known) continue;
      std::string allowed;
      for (const auto& s : kind->properties) allowed += (allowed.empty() ? "" : ", ") + s.name;
      fail(e.property_pos.at(key), e.property_raw.at(key),
           "unknown property '" + key + "' for " + e.decl.kind +
               (allowed.empty() ? std::string(" (it has none)") : " (known: " + allowed + ")"));
    }
  }

  std::vector<Token> tokens_;
  const ElementRegistry* registry_;
  std::vector<PendingElement> elements_;
  std::vector<PendingLink> links_;
};

}  // namespace

std::optional<std::string> ElementDecl::property(const std::string& key) const {
  if (key == "name") return name;
  for (const auto& [k, v] : properties) {
    if (k == key) return v;
  }
  return std::nullopt;
}

bool operator==(const ElementDecl& a, const ElementDecl& b) {
  return a.kind == b.kind && a.name == b.name && a.properties == b.properties;
}

bool operator==(const LinkDecl& a, const LinkDecl& b) {
  return a.from == b.from && a.from_pad == b.from_pad && a.to == b.to && a.to_pad == b.to_pad &&
         a.caps == b.caps;
}

bool operator==(const PipelineGraph& a, const PipelineGraph& b) {
  return a.elements == b.elements && a.links == b.links;
}

PipelineGraph PipelineGraph::parse(std::string_view text, const ElementRegistry* registry) {
  return Parser(text, registry).run();
}

PipelineGraph PipelineGraph::parse(std::string_view text) {
  return parse(text, &ElementRegistry::instance());
}

std::string quote_value(const std::string& value) {
  bool plain = !value.empty() && std::none_of(value.begin(), value.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '!' || c == '"' || c == '\\';
  });
  if (plain) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::string PipelineGraph::serialize() const {
  std::ostringstream out;
  for (const auto& e : elements) {
    out << e.kind << " name=" << e.name;
    for (const auto& [k, v] : e.properties) out << ' ' << k << '=' << quote_value(v);
    out << '\n';
  }
  for (const auto& l : links) {
    out << l.from << '.' << l.from_pad << " ! ";
    if (!l.caps.empty()) out << quote_value(l.caps) << " ! ";
    out << l.to << '.' << l.to_pad << '\n';
  }
  return out.str();
}

const ElementDecl* PipelineGraph::find(const std::string& name) const {
  for (const auto& e : elements) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

ElementDecl* PipelineGraph::find(const std::string& name) {
  return const_cast<ElementDecl*>(std::as_const(*this).find(name));
}

void PipelineGraph::check_acyclic() const {
  std::map<std::string, std::vector<std::string>> next;
  for (const auto& l : links) next[l.from].push_back(l.to);
  std::map<std::string, int> color;  // 0 new, 1 on stack, 2 done
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    color[n] = 1;
    stack.push_back(n);
    for (const auto& m : next[n]) {
      if (color[m] == 1) {
        auto it = std::find(stack.begin(), stack.end(), m);
        std::string path;
        for (; it != stack.end(); ++it) path += *it + " -> ";
        throw ValidationError("pipeline has a link cycle: " + path + m);
      }
      if (color[m] == 0) visit(m);
    }
    stack.pop_back();
    color[n] = 2;
  };
  for (const auto& e : elements) {
    if (color[e.name] == 0) visit(e.name);
  }
}

std::vector<std::string> PipelineGraph::topological_order() const {
  check_acyclic();
  std::map<std::string, std::size_t> indegree;
  for (const auto& e : elements) indegree[e.name] = 0;
  for (const auto& l : links) ++indegree[l.to];
  std::vector<std::string> out;
  std::vector<bool> emitted(elements.size(), false);
  while (out.size() < elements.size()) {
    bool progress = false;
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (emitted[i] || indegree[elements[i].name] != 0) continue;
      emitted[i] = true;
      progress = true;
      out.push_back(elements[i].name);
      for (const auto& l : links) {
        if (l.from == elements[i].name) --indegree[l.to];
      }
      break;
    }
    if (!progress) throw ValidationError("links reference unknown elements");
  }
  return out;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string export_dot(const PipelineGraph& graph,
                       const std::function<std::string(std::size_t)>& label) {
  std::vector<const ElementDecl*> nodes;
  for (const auto& e : graph.elements) nodes.push_back(&e);
  std::sort(nodes.begin(), nodes.end(),
            [](const ElementDecl* a, const ElementDecl* b) { return a->name < b->name; });
  std::vector<std::size_t> edges(graph.links.size());
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = i;
  std::stable_sort(edges.begin(), edges.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = graph.links[a];
    const auto& y = graph.links[b];
    return std::tie(x.from, x.to) < std::tie(y.from, y.to);
  });

  std::ostringstream out;
  out << "digraph pipeline {\n  rankdir=LR;\n  node [shape=box];\n";
  for (const auto* e : nodes) {
    out << "  \"" << dot_escape(e->name) << "\" [label=\"" << dot_escape(e->kind) << "\\n"
        << dot_escape(e->name) << "\"];\n";
  }
  for (auto i : edges) {
    const auto& l = graph.links[i];
    std::string text = label ? label(i) : l.caps;
    out << "  \"" << dot_escape(l.from) << "\" -> \"" << dot_escape(l.to) << "\"";
    std::vector<std::string> attrs;
    if (!text.empty()) attrs.push_back("label=\"" + dot_escape(text) + "\"");
    if (!l.from_pad.empty()) attrs.push_back("taillabel=\"" + dot_escape(l.from_pad) + "\"");
    if (!l.to_pad.empty()) attrs.push_back("headlabel=\"" + dot_escape(l.to_pad) + "\"");
    if (!attrs.empty()) {
      out << " [";
      for (std::size_t k = 0; k < attrs.size(); ++k) out << (k ? ", " : "") << attrs[k];
      out << "]";
    }
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace nnpipe
