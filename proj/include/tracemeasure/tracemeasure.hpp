#ifndef TRACEMEASURE_TRACEMEASURE_HPP
#define TRACEMEASURE_TRACEMEASURE_HPP

#include "alg.hpp"
#include "ars.hpp"
#include "errors.hpp"
#include "events.hpp"
#include "generate.hpp"
#include "ladder.hpp"
#include "lambda_plus.hpp"
#include "measure.hpp"
#include "parser.hpp"
#include "random.hpp"
#include "rational.hpp"
#include "term.hpp"
#include "translate.hpp"
#include "type.hpp"
#include "typing.hpp"

#endif
