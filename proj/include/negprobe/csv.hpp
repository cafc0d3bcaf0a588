#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace negprobe::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: comma separated, double-quoted fields may contain commas,
// newlines and doubled quotes. Blank lines are skipped. Throws ParseError on an
// unterminated quote or stray characters after a closing quote.
std::vector<Record> parse(std::string_view text);

// Quotes the field when it contains a comma, quote, CR/LF or edge whitespace.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace negprobe::csv
