#pragma once

#include "cpref/bdd.hpp"
#include "cpref/cli.hpp"
#include "cpref/explicit_engine.hpp"
#include "cpref/model.hpp"
#include "cpref/proofs.hpp"
#include "cpref/semantics.hpp"
#include "cpref/smv.hpp"
#include "cpref/symbolic.hpp"
#include "cpref/xml.hpp"
