"""Golden grammar corpus: the query text that ships with the engine docs.

Sources lose the leading SELECT line and cut some string literals short, so
each entry reconstructs a complete statement; COLLEGE_SEARCH_SQL additionally
needs its WHERE conditions joined with AND (the source omits the
conjunctions).  Layout quirks that the grammar tolerates are kept verbatim:
the missing comma between the first two value pairs in
COLLEGE_HYPOTHETICAL, the trailing comma inside the key list of
COLLEGE_EXISTING, and the `...` continuation prompts on COUNTRY_HYPOTHETICAL.
"""

# -- college search workflow (SQL filter, hypothetical row, existing rows) --

COLLEGE_SEARCH_SQL = """
SELECT
  "institute",
  "median_sat_math",
  "admit_rate",
  "tuition",
  "median_student_debt",
  "instructional_invest",
  "locale"
FROM college_scorecard
WHERE
  "locale" LIKE '%City%'
  AND "tuition" < 50000
  AND "median_student_debt" < 10000
  AND "instructional_invest" > 50000
LIMIT 10
"""

COLLEGE_HYPOTHETICAL = """
SELECT
  "institute",
  "admit_rate",
  "median_sat_math",
  "tuition",
  "median_student_debt",
  "instructional_invest",
  "locale"
FROM college_scorecard
ORDER BY
  RELEVANCE PROBABILITY
  TO HYPOTHETICAL ROW ((
   "locale" = 'Midsize City'
   "tuition" = 50000,
   "median_student_debt" = 10000,
   "instructional_invest" = 50000
  ))
 IN THE CONTEXT OF
  "instructional_invest"
DESC
LIMIT 10
"""

COLLEGE_EXISTING = """
SELECT
  "institute",
  "admit_rate",
  "median_sat_math",
  "tuition",
  "median_student_debt",
  "instructional_invest",
  "locale"
FROM college_scorecard
WHERE
  "admit_rate" > 0.10
  AND "locale" LIKE '%City%'
ORDER BY
  RELEVANCE PROBABILITY
  TO EXISTING ROWS IN (
   'Duke University',
   'Harvard University',
   'Mass Inst Technology',
   'Yale University',
  )
 IN THE CONTEXT OF
  "instructional_invest"
DESC
LIMIT 10
"""

# -- country workflow (hypothetical row with values) -------------------------

COUNTRY_HYPOTHETICAL = """
...  SELECT "country", "oil", "hdi" FROM population
...  WHERE "government" IS NOT 'monarchy'
...  ORDER BY
...    RELEVANCE PROBABILITY
...    TO HYPOTHETICAL ROW WITH VALUES
...      (("oil"=27, "snow"=0.2, "hdi"=180))
...    IN THE CONTEXT OF "hdi"
"""

# -- named relevance column ordered by its alias ------------------------------

COUNTRY_ALIAS = """
ESTIMATE "country",
  RELEVANCE PROBABILITY
    TO EXISTING ROWS IN
    ('United States')
    IN THE CONTEXT OF
    "life expectancy at birth"
  AS "rel_us_lifexp"
FROM gapminder
ORDER BY "rel_us_lifexp" DESC
LIMIT 15
"""

# -- the three query-record syntaxes -----------------------------------------

SYNTAX_EXISTING = """
SELECT "rowid",
RELEVANCE PROBABILITY
  TO EXISTING ROWS IN ('Duke University', 'Harvard University')
  IN THE CONTEXT OF "instructional_invest"
FROM college_scorecard
"""

SYNTAX_HYPOTHETICAL = """
SELECT "rowid",
RELEVANCE PROBABILITY
  TO HYPOTHETICAL ROWS WITH VALUES (("tuition" = 50000), ("tuition" = 9000))
  IN THE CONTEXT OF "tuition"
FROM college_scorecard
"""

SYNTAX_MIXED = """
SELECT "rowid",
RELEVANCE PROBABILITY
  TO EXISTING ROWS IN ('Duke University')
  AND HYPOTHETICAL ROWS WITH VALUES (("tuition" = 50000))
  IN THE CONTEXT OF "tuition"
FROM college_scorecard
"""

# -- usage patterns: column, filter, comparator, aggregate, dual context ------

USAGE_COLUMN = """
ESTIMATE
  "rowid",
  RELEVANCE PROBABILITY
    TO EXISTING ROWS IN ('Duke University')
    IN THE CONTEXT OF "tuition"
FROM college_scorecard
"""

USAGE_WHERE_FILTER = """
ESTIMATE
  "rowid"
FROM college_scorecard
WHERE (
    RELEVANCE PROBABILITY
      TO EXISTING ROWS IN ('Duke University')
      IN THE CONTEXT OF "tuition"
    ) > 0.5
"""

USAGE_ORDER_BY = """
ESTIMATE
  "rowid"
FROM college_scorecard
ORDER BY
    RELEVANCE PROBABILITY
      TO EXISTING ROWS IN ('Duke University')
      IN THE CONTEXT OF "tuition"
ASC
"""

USAGE_AVG = """
ESTIMATE
  AVG (
    RELEVANCE PROBABILITY
      TO EXISTING ROWS IN ('Duke University', 'Yale University')
      IN THE CONTEXT OF "tuition"
  )
FROM college_scorecard
WHERE "rowid" IN (0, 1, 2, 3)
"""

USAGE_DUAL_CONTEXT = """
ESTIMATE
  "rowid"
FROM college_scorecard
WHERE (
    RELEVANCE PROBABILITY
      TO EXISTING ROWS IN ('Duke University')
      IN THE CONTEXT OF "tuition"
    ) > (
    RELEVANCE PROBABILITY
      TO EXISTING ROWS IN ('Duke University')
      IN THE CONTEXT OF "admit_rate"
    )
"""

# -- cars session -------------------------------------------------------------

CARS_CREATE_TABLE = "CREATE TABLE cars_1987_raw FROM 'cars_1987.csv'"

CARS_SQL_FILTER = """
SELECT
  "make",
  "price",
  "wheels",
  "doors",
  "engine",
  "horsepower",
  "body"
FROM cars_1987_raw
WHERE "price" < 45000
  AND "wheels" = 'rear'
  AND "doors" = 'four'
  AND "engine" >= 250
  AND "horsepower" > 180
  AND "body" = 'sedan'
"""

CARS_CREATE_POPULATION = """
CREATE POPULATION cars_1987
FOR cars_1987_raw
WITH SCHEMA (
  GUESS STATISTICAL TYPES FOR (*);
) WITH BASELINE crosscat;
"""

CARS_INITIALIZE = "INITIALIZE 64 MODELS FOR cars_1987;"

CARS_ANALYZE = "ANALYZE cars_1987 FOR 1 MINUTE;"

CARS_DEPENDENCE = """
ESTIMATE DEPENDENCE PROBABILITY
FROM PAIRWISE VARIABLES
OF cars_1987
"""

CARS_RELEVANCE = """
SELECT
  "make",
  "price",
  "wheels",
  "doors",
  "engine-size",
  "horsepower",
  "style"
FROM cars_1987
ORDER BY
  RELEVANCE PROBABILITY
  TO HYPOTHETICAL ROW ((
   "price" = 42000,
   "wheels" = 'rear',
   "doors" = 'four',
   "engine" = 250,
   "horsepower" = 180,
   "body" = 'sedan'
 ))
 IN THE CONTEXT OF
  "price"
LIMIT 10
"""

CORPUS = {
    "college_search_sql": COLLEGE_SEARCH_SQL,
    "college_hypothetical": COLLEGE_HYPOTHETICAL,
    "college_existing": COLLEGE_EXISTING,
    "country_hypothetical": COUNTRY_HYPOTHETICAL,
    "country_alias": COUNTRY_ALIAS,
    "syntax_existing": SYNTAX_EXISTING,
    "syntax_hypothetical": SYNTAX_HYPOTHETICAL,
    "syntax_mixed": SYNTAX_MIXED,
    "usage_column": USAGE_COLUMN,
    "usage_where_filter": USAGE_WHERE_FILTER,
    "usage_order_by": USAGE_ORDER_BY,
    "usage_avg": USAGE_AVG,
    "usage_dual_context": USAGE_DUAL_CONTEXT,
    "cars_create_table": CARS_CREATE_TABLE,
    "cars_sql_filter": CARS_SQL_FILTER,
    "cars_create_population": CARS_CREATE_POPULATION,
    "cars_initialize": CARS_INITIALIZE,
    "cars_analyze": CARS_ANALYZE,
    "cars_dependence": CARS_DEPENDENCE,
    "cars_relevance": CARS_RELEVANCE,
}
