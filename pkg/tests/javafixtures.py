"""Shared Java source fixtures used across test modules."""

# Fig-style before-refactoring method: three flat invocation statements.
PRINT_OWING = """\
package shop;

class Customer {
    private String name;

    void printOwing() {
        printBanner();
        System.out.println("name: " + name);
        System.out.println("amount: " + getOutstanding());
    }
}
"""

# Same shape but with getters, sized so the two print statements carry
# four invocations and half of the method's statement lines.
PRINT_OWING_GETTERS = """\
package shop;

class Customer {
    private String name;

    void printOwing() {
        printBanner();
        printHeader();
        System.out.println("name: " + getName());
        System.out.println("amount: " + getOutstanding());
    }
}
"""

CALCULATOR = """\
class Calculator {

    int total;

    int compute(int base, int rate) {
        int sum = base + rate;
        int twice = sum * 2;
        sum = sum + twice;
        log(sum);
        return sum + total;
    }
}
"""

REPORT_IF = """\
package app;

import java.util.List;

class Report {

    void fill(List items, int limit) {
        int count = 0;
        if (limit > 0) {
            count = limit + 1;
            items.add(count);
            log(count);
        }
        print(items);
    }
}
"""

GRADER_SWITCH = """\
class Grader {

    int score(int raw, boolean bonus) {
        int points = raw;
        assert raw >= 0;
        points += bonus ? 3 : 1;
        switch (raw) {
            case 0:
                points = 1;
                break;
        }
        return points;
    }
}
"""

LOADER_LOOPS = """\
package app;

import java.util.ArrayList;
import app.util.Helper;

class Loader {

    void run(int n) {
        ArrayList list = new ArrayList();
        Helper helper = new Helper();
        for (int i = 0; i < n; i++) {
            list.add(helper.offset(i));
        }
        while (helper.pending()) {
            helper.step();
        }
        log(list);
    }
}
"""

# One method, ten statements, one depth-1 block of three statements.
TEN_STATEMENTS = """\
class Fixture01 {

    void work(int n) {
        int a = n + 1;
        int b = a * 2;
        log(a);
        if (a > b) {
            log(b);
            b = b + 1;
            mark(b);
        }
        log(b);
        b = b - a;
        finish(a, b);
    }
}
"""

# Two locals written in a range and both read later.
TWO_LIVE_OUT = """\
class Pair {

    int both(int n) {
        int a = n + 1;
        int b = n + 2;
        use(a);
        return a + b;
    }
}
"""

# A break whose loop sits outside any fragment that contains only the body.
BREAK_IN_LOOP = """\
class Jump {

    void spin(int n) {
        int total = 0;
        while (n > 0) {
            total = total + n;
            log(total);
            if (total > 10) {
                break;
            }
        }
        done(total);
    }
}
"""

RETURN_TAIL = """\
class Tail {

    int last(int n) {
        int a = n + 1;
        log(a);
        a = a * 2;
        mark(a);
        return a;
    }
}
"""

EMPTY_CLASS = """\
class Nothing {
}
"""

SINGLE_STATEMENT = """\
class One {

    void once() {
        ping();
    }
}
"""

THREE_FLAT = """\
class Flat {

    void trio() {
        first();
        second();
        third();
    }
}
"""

# Every supported statement kind in one method (17 statements).
STRESS_ALL_KINDS = """\
package stress;

import java.util.List;
import java.io.IOException;

class Stress {

    int total;
    String label;

    int churn(int n, List items) {
        int acc = 0;
        int[] buf = new int[n];
        do {
            acc += buf[acc % 4];
        } while (acc < n);
        for (Object item : items) {
            acc++;
        }
        try {
            acc = parse((String) label);
        } catch (IOException err) {
            log(err);
        } finally {
            acc--;
        }
        boolean ok = items instanceof List && acc > 0xFF;
        char c = 'x';
        double d = 1.5e2;
        Class k = String.class;
        this.total = ok ? acc : -acc;
        label = "done" + d + c + k;
        return this.total;
    }
}
"""

# Methods for the candidate oracle sweep: all have <= 12 statements.
ORACLE_SOURCES = {
    "print_owing": PRINT_OWING,
    "print_owing_getters": PRINT_OWING_GETTERS,
    "calculator": CALCULATOR,
    "report_if": REPORT_IF,
    "grader_switch": GRADER_SWITCH,
    "loader_loops": LOADER_LOOPS,
    "ten_statements": TEN_STATEMENTS,
    "two_live_out": TWO_LIVE_OUT,
    "break_in_loop": BREAK_IN_LOOP,
    "return_tail": RETURN_TAIL,
    "single_statement": SINGLE_STATEMENT,
    "three_flat": THREE_FLAT,
}
