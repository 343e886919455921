#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "epf/errors.hpp"

namespace epf {

/// Fixed float formatting used for every numeric CSV cell, so identical
/// runs produce byte-identical files.
inline std::string fmt_num(double v) {
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.10g", v);
	return buf;
}

/// Exact round-trip formatting for intermediate files that later runs read
/// back (cached artifacts must reproduce the in-memory doubles bit for bit).
inline std::string fmt_exact(double v) {
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

struct CsvTable {
	std::vector<std::string> header;
	std::vector<std::vector<std::string>> rows;

	int column(const std::string& name) const {
		for (std::size_t i = 0; i < header.size(); ++i)
			if (header[i] == name) return static_cast<int>(i);
		return -1;
	}

	int require_column(const std::string& name, const std::string& file) const {
		const int c = column(name);
		if (c < 0) throw SchemaError(file + ": missing column '" + name + "'");
		return c;
	}
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
	std::vector<std::string> out;
	std::string cell;
	bool quoted = false;
	for (std::size_t i = 0; i < line.size(); ++i) {
		const char c = line[i];
		if (quoted) {
			if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
				cell += '"';
				++i;
			} else if (c == '"') {
				quoted = false;
			} else {
				cell += c;
			}
		} else if (c == '"') {
			quoted = true;
		} else if (c == ',') {
			out.push_back(cell);
			cell.clear();
		} else if (c != '\r') {
			cell += c;
		}
	}
	out.push_back(cell);
	return out;
}

} // namespace detail

inline CsvTable read_csv(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in) throw SchemaError("cannot open " + path.string());
	CsvTable t;
	std::string line;
	bool first = true;
	while (std::getline(in, line)) {
		if (line.empty()) continue;
		auto cells = detail::split_csv_line(line);
		if (first) {
			t.header = std::move(cells);
			first = false;
		} else {
			t.rows.push_back(std::move(cells));
		}
	}
	if (first) throw SchemaError(path.string() + ": empty file");
	return t;
}

class CsvWriter {
public:
	explicit CsvWriter(const std::filesystem::path& path) : path_(path.string()), out_(path) {
		if (!out_) throw SchemaError("cannot write " + path_);
	}

	void row(const std::vector<std::string>& cells) {
		for (std::size_t i = 0; i < cells.size(); ++i) {
			if (i) out_ << ',';
			const std::string& c = cells[i];
			if (c.find_first_of(",\"\n") != std::string::npos) {
				out_ << '"';
				for (char ch : c) {
					if (ch == '"') out_ << "\"\"";
					else out_ << ch;
				}
				out_ << '"';
			} else {
				out_ << c;
			}
		}
		out_ << '\n';
	}

private:
	std::string path_;
	std::ofstream out_;
};

inline double parse_num(const std::string& s, const std::string& context) {
	try {
		std::size_t pos = 0;
		const double v = std::stod(s, &pos);
		while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
		if (pos != s.size()) throw std::invalid_argument("trailing");
		return v;
	} catch (const std::exception&) {
		throw SchemaError(context + ": not a number: '" + s + "'");
	}
}

} // namespace epf
