#pragma once

#include <tacpdp/config.hpp>
#include <tacpdp/csv.hpp>
#include <tacpdp/dataset.hpp>
#include <tacpdp/error.hpp>
#include <tacpdp/experiment.hpp>
#include <tacpdp/matrix.hpp>
#include <tacpdp/metrics.hpp>
#include <tacpdp/pairs.hpp>
#include <tacpdp/report.hpp>
#include <tacpdp/stability.hpp>
#include <tacpdp/treatments.hpp>
#include <tacpdp/tree.hpp>
