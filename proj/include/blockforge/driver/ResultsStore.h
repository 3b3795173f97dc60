//======================================================================================================================
//
//! \file ResultsStore.h
//! \brief Relational store of scalar results logged by scenario scripts.
//
//======================================================================================================================
#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

struct sqlite3;

namespace blockforge::driver {

class ResultsError : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

using RecordValue = std::variant<double, std::string>;

struct ResultRecord
{
   std::int64_t runId = 0;
   std::int64_t step  = 0;
   std::string name;
   RecordValue value;

   bool operator==(const ResultRecord&) const = default;
};

struct RunInfo
{
   std::int64_t runId = 0;
   std::string scenario;
   std::string startedAt;
   std::string configText;
};

/*!
 *  SQLite file with the tables
 *    runs(run_id, scenario, started_at, config_text)
 *    results(run_id, step, name, value)   primary key (run_id, step, name)
 *  Inserts go into an open transaction that is committed by flush() and on destruction.
 */
class ResultsStore
{
 public:
   explicit ResultsStore(const std::string& path);
   ~ResultsStore();

   ResultsStore(const ResultsStore&)            = delete;
   ResultsStore& operator=(const ResultsStore&) = delete;

   const std::string& path() const { return path_; }

   /// started_at defaults to the current UTC time in ISO 8601 form.
   std::int64_t beginRun(const std::string& scenario, const std::string& configText, std::string startedAt = {});

   /// Throws ResultsError on a duplicate (run_id, step, name).
   void record(const ResultRecord& record);

   void flush();

   std::vector<RunInfo> runs() const;
   /// Ordered by step, then insertion order.
   std::vector<ResultRecord> results(std::int64_t runId) const;

 private:
   void exec(const std::string& sql);
   void begin();

   std::string path_;
   sqlite3* db_ = nullptr;
   bool inTransaction_ = false;
};

} // namespace blockforge::driver
