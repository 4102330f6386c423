#pragma once

// File formats: trace CSV, sample dumps, classifier batch files, score JSON
// and mode-drop series. All reals are written with 17 significant digits so
// that files round-trip exactly.

#include <iosfwd>
#include <string>
#include <vector>

#include "amgan/metrics.hpp"
#include "amgan/mixture.hpp"
#include "amgan/train.hpp"

namespace amgan::io {

std::string format_real(double value);

// Fixed column order; see trace_columns().
const std::vector<std::string>& trace_columns();
void write_trace_csv(std::ostream& out, const std::vector<Snapshot>& snapshots);
// Throws ParseError.
std::vector<Snapshot> read_trace_csv(std::istream& in);

// Columns x,y,assigned_label,oracle_label. oracle_label is the argmax of the
// mixture posterior at the point.
void write_sample_dump_csv(std::ostream& out, const TrainingTrace& trace,
                           const MixtureSpec& mixture);
// Throws ParseError.
std::vector<Point2> read_sample_dump_csv(std::istream& in);

// Header line `K=<int>`, then one row of K probabilities per sample separated
// by commas and/or whitespace. Blank lines and lines starting with '#' are
// skipped. Throws ParseError carrying the 1-based line number.
ClassifierBatch read_classifier_batch(std::istream& in);
void write_classifier_batch(std::ostream& out, const ClassifierBatch& batch);

// Flat key-value JSON document.
std::string score_report_json(const ScoreReport& report);

// Columns kept,mean,min,max,std_error.
void write_mode_drop_csv(std::ostream& out, const std::vector<ModeDropPoint>& series);

}  // namespace amgan::io
