#pragma once

#include "dcrypps/attack_kb.hpp"
#include "dcrypps/builtin_kb.hpp"
#include "dcrypps/canonical.hpp"
#include "dcrypps/derivation.hpp"
#include "dcrypps/diagnosis.hpp"
#include "dcrypps/error.hpp"
#include "dcrypps/hitting_set.hpp"
#include "dcrypps/model.hpp"
#include "dcrypps/pamela.hpp"
#include "dcrypps/pcc.hpp"
#include "dcrypps/pipeline.hpp"
#include "dcrypps/property.hpp"
#include "dcrypps/report_json.hpp"
#include "dcrypps/sexpr.hpp"
#include "dcrypps/support.hpp"
