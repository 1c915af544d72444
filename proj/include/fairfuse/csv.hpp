#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "fairfuse/blackbox.hpp"
#include "fairfuse/corpus.hpp"
#include "fairfuse/errors.hpp"
#include "fairfuse/frontier.hpp"

// CSV file formats: template seeds, identity terms, annotations, the scored
// corpus (one row per gendered sentence) and frontier tables. Quoting follows
// RFC 4180 (embedded commas and quotes; no embedded newlines).

namespace fairfuse {

namespace csv {

inline std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted)
    throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

inline std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

/// Shortest round-trip decimal form (locale-independent).
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, std::size_t line_no, const std::string& col) {
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ParseError("line " + std::to_string(line_no) + ": column '" + col +
                     "' is not a number: '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s, std::size_t line_no, const std::string& col) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("line " + std::to_string(line_no) + ": column '" + col +
                     "' is not an integer: '" + s + "'");
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line of each row

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("missing required column '" + name + "'");
  }

  std::size_t line(std::size_t row) const { return line_numbers[row]; }
};

inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line, line_no);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size())
        throw ParseError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(t.header.size()) + " fields, got " +
                         std::to_string(fields.size()));
      t.rows.push_back(std::move(fields));
      t.line_numbers.push_back(line_no);
    }
  }
  if (t.header.empty()) throw ParseError("'" + path + "' is empty");
  return t;
}

inline double parse_score(const std::string& s, std::size_t line_no, const std::string& col) {
  const double v = parse_double(s, line_no, col);
  // Out-of-range values are provider faults; reject rather than clamp.
  if (!(v >= -1.0 && v <= 1.0))
    throw ParseError("line " + std::to_string(line_no) + ": column '" + col +
                     "' outside [-1, 1]: '" + s + "'");
  return v;
}

}  // namespace csv

/// Template seed file: template_id,text_pattern,truth
inline std::vector<TemplateRecord> load_templates(const std::string& path) {
  const csv::Table t = csv::read_table(path);
  const std::size_t c_id = t.column("template_id");
  const std::size_t c_text = t.column("text_pattern");
  const std::size_t c_truth = t.column("truth");
  std::vector<TemplateRecord> out;
  out.reserve(t.rows.size());
  std::map<std::string, bool> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    TemplateRecord rec{r[c_id], r[c_text], csv::parse_score(r[c_truth], t.line(i), "truth")};
    if (rec.template_id.empty())
      throw ParseError("line " + std::to_string(t.line(i)) + ": empty template_id");
    if (seen[rec.template_id])
      throw ParseError("line " + std::to_string(t.line(i)) + ": duplicate template_id '" +
                       rec.template_id + "'");
    seen[rec.template_id] = true;
    validate_template(rec);
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw ParseError("'" + path + "' contains no templates");
  return out;
}

/// Identity terms file: male_term,female_term
inline std::vector<IdentityTermPair> load_identity_terms(const std::string& path) {
  const csv::Table t = csv::read_table(path);
  const std::size_t c_m = t.column("male_term");
  const std::size_t c_f = t.column("female_term");
  std::vector<IdentityTermPair> out;
  std::map<std::pair<std::string, std::string>, bool> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    IdentityTermPair p{t.rows[i][c_m], t.rows[i][c_f]};
    if (p.male_term.empty() || p.female_term.empty())
      throw ParseError("line " + std::to_string(t.line(i)) + ": empty identity term");
    if (seen[{p.male_term, p.female_term}])
      throw ParseError("line " + std::to_string(t.line(i)) + ": duplicate term pair");
    seen[{p.male_term, p.female_term}] = true;
    out.push_back(std::move(p));
  }
  if (out.empty()) throw ParseError("'" + path + "' contains no term pairs");
  return out;
}

/// Annotation file: template_id,annotator_id,valence,arousal
inline std::vector<AnnotationRecord> load_annotations(const std::string& path) {
  const csv::Table t = csv::read_table(path);
  const std::size_t c_t = t.column("template_id");
  const std::size_t c_a = t.column("annotator_id");
  const std::size_t c_v = t.column("valence");
  const std::size_t c_r = t.column("arousal");
  std::vector<AnnotationRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    AnnotationRecord rec;
    rec.template_id = r[c_t];
    rec.annotator_id = r[c_a];
    if (r[c_v] == "positive") rec.valence = Valence::positive;
    else if (r[c_v] == "negative") rec.valence = Valence::negative;
    else
      throw ParseError("line " + std::to_string(t.line(i)) +
                       ": valence must be 'positive' or 'negative', got '" + r[c_v] + "'");
    const long a = csv::parse_long(r[c_r], t.line(i), "arousal");
    if (a < 1 || a > 10)
      throw ParseError("line " + std::to_string(t.line(i)) + ": arousal outside 1..10");
    rec.arousal = static_cast<int>(a);
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw ParseError("'" + path + "' contains no annotations");
  return out;
}

/// A scored corpus in memory: per-instance gendered pairs plus truths.
struct Corpus {
  std::vector<std::string> modality_names;
  std::vector<GenderedPair> pairs;
  std::map<std::string, double> truths;  // by instance id
};

inline constexpr const char* kScorePrefix = "score.";

/// Corpus CSV: template_id,gender,text,y,score.<modality>...
/// One row per gendered sentence; rows pair up by template_id (m then f).
inline Corpus load_corpus(const std::string& path) {
  const csv::Table t = csv::read_table(path);
  const std::size_t c_id = t.column("template_id");
  const std::size_t c_g = t.column("gender");
  const std::size_t c_text = t.column("text");
  const std::size_t c_y = t.column("y");
  Corpus corpus;
  std::vector<std::size_t> score_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i].rfind(kScorePrefix, 0) == 0) {
      score_cols.push_back(i);
      corpus.modality_names.push_back(t.header[i].substr(std::string(kScorePrefix).size()));
    }
  }
  if (score_cols.empty()) throw ParseError("'" + path + "' has no score.<modality> columns");
  for (std::size_t i = 0; i < corpus.modality_names.size(); ++i)
    for (std::size_t j = i + 1; j < corpus.modality_names.size(); ++j)
      if (corpus.modality_names[i] == corpus.modality_names[j])
        throw ParseError("'" + path + "' has duplicate column '" + kScorePrefix +
                         corpus.modality_names[i] + "'");

  struct Half {
    std::vector<double> scores;
    std::string text;
    bool present = false;
  };
  struct Entry {
    Half male, female;
    double y = 0;
    std::size_t order = 0;
  };
  std::map<std::string, Entry> by_id;
  std::size_t next_order = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t line_no = t.line(i);
    const std::string& id = r[c_id];
    if (id.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty template_id");
    const std::string& g = r[c_g];
    if (g != "m" && g != "f")
      throw ParseError("line " + std::to_string(line_no) + ": gender must be 'm' or 'f'");
    const double y = csv::parse_score(r[c_y], line_no, "y");
    auto [it, inserted] = by_id.try_emplace(id);
    Entry& e = it->second;
    if (inserted) {
      e.order = next_order++;
      e.y = y;
    } else if (e.y != y) {
      throw ParseError("line " + std::to_string(line_no) + ": y differs between genders of '" +
                       id + "'");
    }
    Half& h = g == "m" ? e.male : e.female;
    if (h.present)
      throw ParseError("line " + std::to_string(line_no) + ": duplicate " + g + " row for '" +
                       id + "'");
    h.present = true;
    h.text = r[c_text];
    for (std::size_t s = 0; s < score_cols.size(); ++s)
      h.scores.push_back(csv::parse_score(r[score_cols[s]], line_no,
                                          t.header[score_cols[s]]));
  }

  std::vector<const std::map<std::string, Entry>::value_type*> ordered;
  ordered.reserve(by_id.size());
  for (const auto& kv : by_id) ordered.push_back(&kv);
  std::sort(ordered.begin(), ordered.end(),
            [](auto* a, auto* b) { return a->second.order < b->second.order; });

  for (const auto* kv : ordered) {
    const Entry& e = kv->second;
    if (!e.male.present || !e.female.present)
      throw ParseError("template '" + kv->first + "' is missing its " +
                       (e.male.present ? "female" : "male") + " row");
    GenderedPair p;
    p.template_id = kv->first;
    p.male_scores = e.male.scores;
    p.female_scores = e.female.scores;
    p.male_text = e.male.text;
    p.female_text = e.female.text;
    corpus.pairs.push_back(std::move(p));
    corpus.truths[kv->first] = e.y;
  }
  if (corpus.pairs.empty()) throw ParseError("'" + path + "' contains no rows");
  return corpus;
}

inline std::string render_corpus_csv(const Corpus& corpus) {
  std::ostringstream out;
  out << "template_id,gender,text,y";
  for (const auto& name : corpus.modality_names) out << ',' << kScorePrefix << name;
  out << '\n';
  for (const auto& p : corpus.pairs) {
    const double y = corpus.truths.at(p.template_id);
    out << csv::quote_field(p.template_id) << ",m," << csv::quote_field(p.male_text) << ','
        << csv::format_double(y);
    for (double s : p.male_scores) out << ',' << csv::format_double(s);
    out << '\n';
    out << csv::quote_field(p.template_id) << ",f," << csv::quote_field(p.female_text) << ','
        << csv::format_double(y);
    for (double s : p.female_scores) out << ',' << csv::format_double(s);
    out << '\n';
  }
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ValidationError("write failed for '" + path + "'");
}

inline void write_corpus(const std::string& path, const Corpus& corpus) {
  write_file(path, render_corpus_csv(corpus));
}

/// Recorded provider table from a corpus-schema CSV, one modality column.
inline RecordedTable load_recorded_table(const std::string& path,
                                         const std::string& modality_name) {
  const Corpus corpus = load_corpus(path);
  std::size_t idx = corpus.modality_names.size();
  for (std::size_t i = 0; i < corpus.modality_names.size(); ++i)
    if (corpus.modality_names[i] == modality_name) idx = i;
  if (idx == corpus.modality_names.size())
    throw ParseError("'" + path + "' has no column '" + kScorePrefix + modality_name + "'");
  RecordedTable table;
  for (const auto& p : corpus.pairs)
    table[p.template_id] = {p.male_scores[idx], p.female_scores[idx]};
  return table;
}

/// Frontier table: beta,acc_error,bias,dominated
inline std::string render_frontier_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "beta,acc_error,bias,dominated\n";
  for (const auto& p : points)
    out << csv::format_double(p.beta) << ',' << csv::format_double(p.acc_error) << ','
        << csv::format_double(p.bias) << ',' << (p.dominated ? 1 : 0) << '\n';
  return out.str();
}

inline void write_frontier_csv(const std::string& path, const std::vector<SweepPoint>& points) {
  write_file(path, render_frontier_csv(points));
}

}  // namespace fairfuse
