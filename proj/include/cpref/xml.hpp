#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpref/model.hpp"

namespace cpref {

class MalformedXml : public Error {
 public:
  using Error::Error;
};

/// Well-formed XML whose element structure is not what the dialect expects.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// A PREFERENCE element without the 'better:worse' shape.
class MalformedPreference : public Error {
 public:
  using Error::Error;
};

class UnknownQueryKind : public Error {
 public:
  using Error::Error;
};

/// The specification parsed but violates a structural invariant.
class InvalidSpecification : public Error {
 public:
  InvalidSpecification(std::string message, std::vector<Violation> violations)
      : Error(std::move(message)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

struct XmlElement {
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<XmlElement> children;
  std::string text;  // trimmed character data

  const std::string* attribute(std::string_view name) const {
    for (const auto& [k, v] : attributes)
      if (k == name) return &v;
    return nullptr;
  }

  const XmlElement* child(std::string_view t) const {
    for (const auto& c : children)
      if (c.tag == t) return &c;
    return nullptr;
  }

  const XmlElement& require_child(std::string_view t) const {
    if (const XmlElement* c = child(t)) return *c;
    throw StructureError("element <" + tag + "> is missing a <" + std::string(t) + "> child");
  }

  std::vector<const XmlElement*> children_named(std::string_view t) const {
    std::vector<const XmlElement*> out;
    for (const auto& c : children)
      if (c.tag == t) out.push_back(&c);
    return out;
  }
};

namespace detail {

struct XmlParser {
  std::string_view in;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos && i < in.size(); ++i) {
      if (in[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw MalformedXml(what + " at line " + std::to_string(line) + ", column " +
                       std::to_string(col));
  }

  bool eof() const { return pos >= in.size(); }
  char peek() const { return eof() ? '\0' : in[pos]; }
  bool starts_with(std::string_view s) const { return in.substr(pos, s.size()) == s; }

  void skip_ws() {
    while (!eof() && (in[pos] == ' ' || in[pos] == '\t' || in[pos] == '\r' || in[pos] == '\n'))
      ++pos;
  }

  void expect(std::string_view s) {
    if (!starts_with(s)) fail("expected '" + std::string(s) + "'");
    pos += s.size();
  }

  void skip_until(std::string_view closer, const char* what) {
    auto at = in.find(closer, pos);
    if (at == std::string_view::npos) fail(std::string("unterminated ") + what);
    pos = at + closer.size();
  }

  /// Whitespace, comments, processing instructions and a DOCTYPE, in any mix.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        pos += 4;
        skip_until("-->", "comment");
      } else if (starts_with("<?")) {
        pos += 2;
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!DOCTYPE")) {
        pos += 9;
        int depth = 0;
        bool closed = false;
        while (!eof()) {
          char c = in[pos++];
          if (c == '[' || c == '<') {
            ++depth;
          } else if (c == ']') {
            --depth;
          } else if (c == '>') {
            if (depth == 0) {
              closed = true;
              break;
            }
            --depth;
          }
        }
        if (!closed) fail("unterminated DOCTYPE");
      } else {
        return;
      }
    }
  }

  static bool name_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':';
  }
  static bool name_char(char c) {
    return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
  }

  std::string parse_name() {
    if (eof() || !name_start(peek())) fail("expected a name");
    std::size_t start = pos;
    while (!eof() && name_char(in[pos])) ++pos;
    return std::string(in.substr(start, pos - start));
  }

  void append_entity(std::string& out) {
    // at '&'
    auto end = in.find(';', pos);
    if (end == std::string_view::npos || end - pos > 12) fail("unterminated entity reference");
    std::string_view body = in.substr(pos + 1, end - pos - 1);
    if (body == "lt")
      out += '<';
    else if (body == "gt")
      out += '>';
    else if (body == "amp")
      out += '&';
    else if (body == "apos")
      out += '\'';
    else if (body == "quot")
      out += '"';
    else if (!body.empty() && body[0] == '#') {
      int base = 10;
      std::string_view digits = body.substr(1);
      if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
        base = 16;
        digits = digits.substr(1);
      }
      unsigned long code = 0;
      if (digits.empty()) fail("empty character reference");
      for (char c : digits) {
        int d;
        if (c >= '0' && c <= '9')
          d = c - '0';
        else if (base == 16 && c >= 'a' && c <= 'f')
          d = c - 'a' + 10;
        else if (base == 16 && c >= 'A' && c <= 'F')
          d = c - 'A' + 10;
        else
          fail("bad character reference");
        code = code * static_cast<unsigned long>(base) + static_cast<unsigned long>(d);
      }
      if (code == 0 || code > 0x10FFFF) fail("character reference out of range");
      // UTF-8 encode
      if (code < 0x80) {
        out += static_cast<char>(code);
      } else if (code < 0x800) {
        out += static_cast<char>(0xC0 | (code >> 6));
        out += static_cast<char>(0x80 | (code & 0x3F));
      } else if (code < 0x10000) {
        out += static_cast<char>(0xE0 | (code >> 12));
        out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (code & 0x3F));
      } else {
        out += static_cast<char>(0xF0 | (code >> 18));
        out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (code & 0x3F));
      }
    } else {
      fail("unknown entity '&" + std::string(body) + ";'");
    }
    pos = end + 1;
  }

  std::string parse_attr_value() {
    if (peek() != '"' && peek() != '\'') fail("expected a quoted attribute value");
    char quote = in[pos++];
    std::string out;
    while (!eof() && peek() != quote) {
      if (peek() == '&')
        append_entity(out);
      else if (peek() == '<')
        fail("'<' in attribute value");
      else
        out += in[pos++];
    }
    if (eof()) fail("unterminated attribute value");
    ++pos;
    return out;
  }

  XmlElement parse_element() {
    expect("<");
    XmlElement elem;
    elem.tag = parse_name();
    std::string text;
    for (;;) {
      skip_ws();
      if (starts_with("/>")) {
        pos += 2;
        return elem;
      }
      if (peek() == '>') {
        ++pos;
        break;
      }
      std::string name = parse_name();
      skip_ws();
      expect("=");
      skip_ws();
      elem.attributes.emplace_back(std::move(name), parse_attr_value());
    }
    for (;;) {
      if (eof()) fail("unterminated element <" + elem.tag + ">");
      if (starts_with("</")) {
        pos += 2;
        std::string name = parse_name();
        skip_ws();
        expect(">");
        if (name != elem.tag)
          fail("closing tag </" + name + "> does not match <" + elem.tag + ">");
        elem.text = std::string(trim(text));
        return elem;
      }
      if (starts_with("<!--")) {
        pos += 4;
        skip_until("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        pos += 9;
        auto end = in.find("]]>", pos);
        if (end == std::string_view::npos) fail("unterminated CDATA section");
        text += std::string(in.substr(pos, end - pos));
        pos = end + 3;
      } else if (starts_with("<?")) {
        pos += 2;
        skip_until("?>", "processing instruction");
      } else if (peek() == '<') {
        elem.children.push_back(parse_element());
      } else if (peek() == '&') {
        append_entity(text);
      } else {
        text += in[pos++];
      }
    }
  }
};

}  // namespace detail

inline XmlElement parse_xml(std::string_view text) {
  detail::XmlParser p{text};
  if (p.starts_with("\xEF\xBB\xBF")) p.pos += 3;
  p.skip_misc();
  if (p.eof()) p.fail("document has no root element");
  XmlElement root = p.parse_element();
  p.skip_misc();
  if (!p.eof()) p.fail("content after the root element");
  return root;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Minimal indenting writer; output is deterministic for identical calls.
class XmlWriter {
 public:
  using Attrs = std::vector<std::pair<std::string, std::string>>;

  void open(const std::string& tag, const Attrs& attrs = {}) {
    line_start();
    out_ += '<' + tag;
    append_attrs(attrs);
    out_ += ">\n";
    stack_.push_back(tag);
  }

  void close() {
    std::string tag = stack_.back();
    stack_.pop_back();
    line_start();
    out_ += "</" + tag + ">\n";
  }

  void leaf(const std::string& tag, const Attrs& attrs = {}) {
    line_start();
    out_ += '<' + tag;
    append_attrs(attrs);
    out_ += "/>\n";
  }

  void text_element(const std::string& tag, std::string_view text, const Attrs& attrs = {}) {
    line_start();
    out_ += '<' + tag;
    append_attrs(attrs);
    out_ += '>' + xml_escape(text) + "</" + tag + ">\n";
  }

  const std::string& str() const { return out_; }

 private:
  void line_start() { out_.append(2 * stack_.size(), ' '); }
  void append_attrs(const Attrs& attrs) {
    for (const auto& [k, v] : attrs) out_ += ' ' + k + "=\"" + xml_escape(v) + '"';
  }

  std::string out_;
  std::vector<std::string> stack_;
};

namespace detail {

inline Variable parse_variable_element(const XmlElement& elem) {
  Variable v;
  v.name = elem.require_child("NAME").text;
  for (const XmlElement* d : elem.children_named("DOMAIN-VALUE")) v.domain.push_back(d->text);
  for (const auto& c : elem.children)
    if (c.tag != "NAME" && c.tag != "DOMAIN-VALUE")
      throw StructureError("unexpected element <" + c.tag + "> inside <VARIABLE>");
  return v;
}

inline void parse_statement_element(const XmlElement& elem,
                                    std::vector<PreferenceStatement>& out) {
  PreferenceStatement base;
  base.id = elem.require_child("STATEMENT-ID").text;
  base.target = elem.require_child("VARIABLE").text;
  std::vector<std::pair<std::string, std::string>> prefs;
  for (const auto& c : elem.children) {
    if (c.tag == "STATEMENT-ID" || c.tag == "VARIABLE") continue;
    if (c.tag == "CONDITION") {
      std::pair<std::string, std::string> asg;
      try {
        asg = split_assignment(c.text);
      } catch (const MalformedAssignment& e) {
        throw MalformedAssignment("statement " + base.id + ": " + e.what());
      }
      if (!base.condition.emplace(asg).second)
        throw StructureError("statement " + base.id + ": variable '" + asg.first +
                             "' conditioned twice");
    } else if (c.tag == "PREFERENCE") {
      auto colon = c.text.find(':');
      if (colon == std::string::npos)
        throw MalformedPreference("statement " + base.id + ": expected 'better:worse', got '" +
                                  c.text + "'");
      std::string better(trim(std::string_view(c.text).substr(0, colon)));
      std::string worse(trim(std::string_view(c.text).substr(colon + 1)));
      if (better.empty() || worse.empty())
        throw MalformedPreference("statement " + base.id + ": expected 'better:worse', got '" +
                                  c.text + "'");
      prefs.emplace_back(std::move(better), std::move(worse));
    } else if (c.tag == "REGARDLESS-OF") {
      base.less_important.insert(c.text);
    } else {
      throw StructureError("unexpected element <" + c.tag + "> inside <PREFERENCE-STATEMENT>");
    }
  }
  if (prefs.empty())
    throw StructureError("statement " + base.id + " has no <PREFERENCE> element");
  // Several PREFERENCE children are sugar for one statement per pair, sharing
  // the condition and the less-important set.
  for (std::size_t k = 0; k < prefs.size(); ++k) {
    PreferenceStatement s = base;
    if (prefs.size() > 1) s.id += "#" + std::to_string(k + 1);
    s.better = prefs[k].first;
    s.worse = prefs[k].second;
    out.push_back(std::move(s));
  }
}

[[noreturn]] inline void throw_for_violations(const std::vector<Violation>& violations) {
  for (const auto& v : violations) {
    std::string where = v.statement_id.empty() ? "" : " (statement " + v.statement_id + ")";
    if (v.rule == "UndeclaredVariable") throw UndefinedVariable(v.detail + where);
    if (v.rule == "UndefinedValue") throw UndefinedValue(v.detail + where);
  }
  std::string message = "invalid preference specification:";
  for (const auto& v : violations) {
    message += "\n  [" + v.rule + "] " + v.detail;
    if (!v.statement_id.empty()) message += " (statement " + v.statement_id + ")";
  }
  throw InvalidSpecification(message, violations);
}

}  // namespace detail

/// Reads the XML specification dialect: VARIABLE declarations with NAME and
/// DOMAIN-VALUE children, then PREFERENCE-STATEMENT elements with
/// STATEMENT-ID, VARIABLE, CONDITION ("var=value"), PREFERENCE
/// ("better:worse") and REGARDLESS-OF children. The returned spec passes
/// validate_spec.
inline PreferenceSpec parse_spec(std::string_view xml_text) {
  XmlElement root = parse_xml(xml_text);
  if (root.tag != "PREFERENCE-SPECIFICATION")
    throw StructureError("expected <PREFERENCE-SPECIFICATION> root, got <" + root.tag + ">");
  PreferenceSpec spec;
  if (const std::string* name = root.attribute("NAME")) spec.name = *name;
  for (const auto& c : root.children) {
    if (c.tag == "VARIABLE")
      spec.variables.push_back(detail::parse_variable_element(c));
    else if (c.tag == "PREFERENCE-STATEMENT")
      detail::parse_statement_element(c, spec.statements);
    else
      throw StructureError("unexpected element <" + c.tag +
                           "> inside <PREFERENCE-SPECIFICATION>");
  }
  if (auto violations = validate_spec(spec); !violations.empty())
    detail::throw_for_violations(violations);
  return spec;
}

/// Re-emits a spec in the same dialect; a debugging utility whose output
/// reparses to a structurally equal spec.
inline std::string emit_spec(const PreferenceSpec& spec) {
  XmlWriter w;
  XmlWriter::Attrs root_attrs;
  if (!spec.name.empty()) root_attrs.push_back({"NAME", spec.name});
  w.open("PREFERENCE-SPECIFICATION", root_attrs);
  for (const auto& v : spec.variables) {
    w.open("VARIABLE");
    w.text_element("NAME", v.name);
    for (const auto& d : v.domain) w.text_element("DOMAIN-VALUE", d);
    w.close();
  }
  for (const auto& s : spec.statements) {
    w.open("PREFERENCE-STATEMENT");
    w.text_element("STATEMENT-ID", s.id);
    w.text_element("VARIABLE", s.target);
    for (const auto& [var, val] : s.condition) w.text_element("CONDITION", var + "=" + val);
    w.text_element("PREFERENCE", s.better + ":" + s.worse);
    for (const auto& o : s.less_important) w.text_element("REGARDLESS-OF", o);
    w.close();
  }
  w.close();
  return w.str();
}

/// A query file before its spec references are loaded.
struct QueryDocument {
  QueryKind kind = QueryKind::Consistency;
  std::vector<std::string> spec_files;
  std::optional<std::string> better_text;
  std::optional<std::string> worse_text;
};

inline QueryDocument parse_query_document(std::string_view xml_text) {
  XmlElement root = parse_xml(xml_text);
  if (root.tag != "PREFERENCE-QUERY")
    throw StructureError("expected <PREFERENCE-QUERY> root, got <" + root.tag + ">");
  QueryDocument doc;
  const std::string* kind = root.attribute("KIND");
  if (!kind) throw UnknownQueryKind("<PREFERENCE-QUERY> is missing its KIND attribute");
  auto parsed = query_kind_from(*kind);
  if (!parsed) throw UnknownQueryKind("unknown query kind '" + *kind + "'");
  doc.kind = *parsed;
  for (const auto& c : root.children) {
    if (c.tag == "SPEC-FILE")
      doc.spec_files.push_back(c.text);
    else if (c.tag == "BETTER-OUTCOME")
      doc.better_text = c.text;
    else if (c.tag == "WORSE-OUTCOME")
      doc.worse_text = c.text;
    else
      throw StructureError("unexpected element <" + c.tag + "> inside <PREFERENCE-QUERY>");
  }
  std::size_t wanted =
      doc.kind == QueryKind::Subsumption || doc.kind == QueryKind::Equivalence ? 2 : 1;
  if (doc.spec_files.size() != wanted)
    throw StructureError(to_string(doc.kind) + " query needs " + std::to_string(wanted) +
                         " SPEC-FILE element(s), found " +
                         std::to_string(doc.spec_files.size()));
  if (doc.kind == QueryKind::Dominance && (!doc.better_text || !doc.worse_text))
    throw StructureError("DOMINANCE query needs BETTER-OUTCOME and WORSE-OUTCOME elements");
  return doc;
}

/// Binds a query document to its loaded specification(s), validating any
/// outcomes against the first one.
inline Query resolve_query(const QueryDocument& doc,
                           const std::vector<const PreferenceSpec*>& specs) {
  std::size_t wanted =
      doc.kind == QueryKind::Subsumption || doc.kind == QueryKind::Equivalence ? 2 : 1;
  if (specs.size() != wanted)
    throw Error("query needs " + std::to_string(wanted) + " specification(s), got " +
                std::to_string(specs.size()));
  Query q;
  q.kind = doc.kind;
  q.spec_refs = doc.spec_files;
  if (doc.kind == QueryKind::Dominance) {
    q.better = parse_outcome(*specs[0], *doc.better_text);
    q.worse = parse_outcome(*specs[0], *doc.worse_text);
    if (q.better == q.worse)
      throw Error("dominance query needs two distinct outcomes");
  }
  if (wanted == 2) check_same_universe(*specs[0], *specs[1]);
  return q;
}

/// Serializes a query answer, echoing the dominance outcomes and rendering
/// the proof as alternating OUTCOME/STEP elements (counter-flips as a single
/// COUNTER-FLIP element). Byte-identical for identical inputs.
inline std::string emit_result(const QueryResult& result, const Query& query,
                               const PreferenceSpec& spec) {
  XmlWriter w;
  w.open("RESULT", {{"KIND", to_string(query.kind)},
                    {"ANSWER", result.answer ? "true" : "false"},
                    {"ENGINE", to_string(result.engine)},
                    {"ELAPSED-US", std::to_string(result.elapsed.count())}});
  if (query.kind == QueryKind::Dominance) {
    w.text_element("BETTER-OUTCOME", format_outcome(spec, query.better));
    w.text_element("WORSE-OUTCOME", format_outcome(spec, query.worse));
  }
  if (result.proof) {
    const Proof& proof = *result.proof;
    XmlWriter::Attrs attrs{{"KIND", to_string(proof.kind)}};
    if (proof.direction) attrs.push_back({"DIRECTION", to_string(*proof.direction)});
    w.open("PROOF", attrs);
    if (proof.kind == ProofKind::NonSubsumptionFlip) {
      for (const auto& step : proof.steps) {
        w.open("COUNTER-FLIP", {{"STATEMENT-ID", step.statement_id}});
        w.text_element("FROM", format_outcome(spec, step.from));
        w.text_element("TO", format_outcome(spec, step.to));
        w.close();
      }
    } else {
      for (std::size_t i = 0; i < proof.steps.size(); ++i) {
        if (i == 0) w.text_element("OUTCOME", format_outcome(spec, proof.steps[i].from));
        w.leaf("STEP", {{"STATEMENT-ID", proof.steps[i].statement_id}});
        w.text_element("OUTCOME", format_outcome(spec, proof.steps[i].to));
      }
    }
    w.close();
  }
  w.close();
  return w.str();
}

}  // namespace cpref
