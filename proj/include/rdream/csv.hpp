#ifndef RDREAM_CSV_HPP
#define RDREAM_CSV_HPP

#include <string>
#include <vector>

#include "rdream/types.hpp"

namespace rdream {

struct CsvIngestResult {
  Dataset data;
  Index dropped_rows = 0;
  std::string response_name;
  std::vector<std::string> covariate_names;
};

// Reads a UTF-8 comma-separated file with a header row and '.' decimals.
// Rows with any non-numeric or missing cell in the selected columns are
// dropped and counted. An empty covariate list selects every column other
// than the response.
CsvIngestResult ingest_csv(const std::string& path,
                           const std::string& response_column,
                           const std::vector<std::string>& covariate_columns);

}  // namespace rdream

#endif  // RDREAM_CSV_HPP
