//! A small OpenQASM reader that keeps only `cx`/`cz` gates.

use std::collections::HashMap;

use super::{Circuit, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Number,
    Str,
    Sym(char),
    Arrow,
    EqEq,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(2, &mut i);
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                advance(1, &mut i);
            }
            if i >= chars.len() {
                return Err(syntax(tl, tc, "unterminated block comment"));
            }
            advance(2, &mut i);
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i);
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Ident(word),
                line: tl,
                col: tc,
            });
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut real = false;
            while i < chars.len() {
                let d = chars[i];
                if d.is_ascii_digit() {
                    advance(1, &mut i);
                } else if d == '.' || d == 'e' || d == 'E' {
                    real = true;
                    advance(1, &mut i);
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') && (d == 'e' || d == 'E') {
                        advance(1, &mut i);
                    }
                } else {
                    break;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if real {
                Tok::Number
            } else {
                Tok::Int(text.parse().map_err(|_| syntax(tl, tc, "integer literal out of range"))?)
            };
            out.push(Token { tok, line: tl, col: tc });
        } else if c == '"' {
            advance(1, &mut i);
            while i < chars.len() && chars[i] != '"' {
                advance(1, &mut i);
            }
            if i >= chars.len() {
                return Err(syntax(tl, tc, "unterminated string"));
            }
            advance(1, &mut i);
            out.push(Token {
                tok: Tok::Str,
                line: tl,
                col: tc,
            });
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            advance(2, &mut i);
            out.push(Token {
                tok: Tok::Arrow,
                line: tl,
                col: tc,
            });
        } else if c == '=' && chars.get(i + 1) == Some(&'=') {
            advance(2, &mut i);
            out.push(Token {
                tok: Tok::EqEq,
                line: tl,
                col: tc,
            });
        } else if "[](){};,+-*/^".contains(c) {
            advance(1, &mut i);
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                col: tc,
            });
        } else {
            return Err(syntax(tl, tc, &format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

fn syntax(line: usize, col: usize, message: &str) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        message: message.to_string(),
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// register name -> (offset, size)
    qregs: HashMap<String, (usize, usize)>,
    num_qubits: usize,
    gates: Vec<(usize, usize, String)>,
}

struct QArg {
    register: String,
    index: Option<usize>,
    line: usize,
    col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| self.eof())?;
        self.pos += 1;
        Ok(t)
    }

    fn eof(&self) -> ParseError {
        let (line, col) = self.toks.last().map_or((1, 1), |t| (t.line, t.col));
        syntax(line, col, "unexpected end of input")
    }

    fn expect_sym(&mut self, c: char) -> Result<Token, ParseError> {
        let t = self.next()?;
        if t.tok == Tok::Sym(c) {
            Ok(t)
        } else {
            Err(syntax(t.line, t.col, &format!("expected `{c}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t)),
            _ => Err(syntax(t.line, t.col, "expected an identifier")),
        }
    }

    fn expect_int(&mut self) -> Result<usize, ParseError> {
        let t = self.next()?;
        match t.tok {
            Tok::Int(n) => Ok(n),
            _ => Err(syntax(t.line, t.col, "expected an integer")),
        }
    }

    fn skip_statement(&mut self) -> Result<(), ParseError> {
        loop {
            if self.next()?.tok == Tok::Sym(';') {
                return Ok(());
            }
        }
    }

    fn skip_balanced(&mut self, open: char, close: char) -> Result<(), ParseError> {
        self.expect_sym(open)?;
        let mut depth = 1;
        while depth > 0 {
            let t = self.next()?;
            if t.tok == Tok::Sym(open) {
                depth += 1;
            } else if t.tok == Tok::Sym(close) {
                depth -= 1;
            }
        }
        Ok(())
    }

    fn declare(&mut self, name: String, size: usize, at: &Token) -> Result<(), ParseError> {
        if self.qregs.contains_key(&name) {
            return Err(syntax(at.line, at.col, &format!("register `{name}` declared twice")));
        }
        self.qregs.insert(name, (self.num_qubits, size));
        self.num_qubits += size;
        Ok(())
    }

    fn statement(&mut self, record: bool) -> Result<(), ParseError> {
        let (word, head) = self.expect_ident()?;
        match word.as_str() {
            "OPENQASM" | "include" | "creg" | "bit" | "opaque" | "measure" | "barrier" | "reset" => {
                self.skip_statement()
            }
            "qreg" => {
                let (name, _) = self.expect_ident()?;
                self.expect_sym('[')?;
                let size = self.expect_int()?;
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                self.declare(name, size, &head)
            }
            "qubit" => {
                let size = if self.peek().map(|t| &t.tok) == Some(&Tok::Sym('[')) {
                    self.expect_sym('[')?;
                    let n = self.expect_int()?;
                    self.expect_sym(']')?;
                    n
                } else {
                    1
                };
                let (name, _) = self.expect_ident()?;
                self.expect_sym(';')?;
                self.declare(name, size, &head)
            }
            "gate" => {
                log::warn!("{}:{}: ignoring gate definition", head.line, head.col);
                while self.peek().is_some_and(|t| t.tok != Tok::Sym('{')) {
                    self.pos += 1;
                }
                self.skip_balanced('{', '}')
            }
            "if" => {
                log::warn!("{}:{}: ignoring classically controlled statement", head.line, head.col);
                self.skip_balanced('(', ')')?;
                self.statement(false)
            }
            _ => self.application(word, head, record),
        }
    }

    fn application(&mut self, name: String, head: Token, record: bool) -> Result<(), ParseError> {
        if self.peek().map(|t| &t.tok) == Some(&Tok::Sym('(')) {
            self.skip_balanced('(', ')')?;
        }
        let mut args = Vec::new();
        loop {
            let (register, t) = self.expect_ident()?;
            let index = if self.peek().map(|t| &t.tok) == Some(&Tok::Sym('[')) {
                self.expect_sym('[')?;
                let i = self.expect_int()?;
                self.expect_sym(']')?;
                Some(i)
            } else {
                None
            };
            args.push(QArg {
                register,
                index,
                line: t.line,
                col: t.col,
            });
            let sep = self.next()?;
            match sep.tok {
                Tok::Sym(',') => continue,
                Tok::Sym(';') => break,
                _ => return Err(syntax(sep.line, sep.col, "expected `,` or `;`")),
            }
        }
        if args.len() > 2 {
            return Err(ParseError::UnsupportedGate {
                line: head.line,
                col: head.col,
                name,
                arity: args.len(),
            });
        }
        let mut qubits = Vec::with_capacity(args.len());
        for a in &args {
            let Some(&(offset, size)) = self.qregs.get(&a.register) else {
                return Err(ParseError::UndeclaredQubit {
                    line: a.line,
                    col: a.col,
                    register: a.register.clone(),
                    index: a.index.unwrap_or(0),
                });
            };
            match a.index {
                Some(i) if i >= size => {
                    return Err(ParseError::UndeclaredQubit {
                        line: a.line,
                        col: a.col,
                        register: a.register.clone(),
                        index: i,
                    })
                }
                Some(i) => qubits.push(offset + i),
                None if args.len() == 1 => {}
                None => {
                    return Err(syntax(
                        a.line,
                        a.col,
                        "register broadcast is only supported for single-qubit gates",
                    ))
                }
            }
        }
        if args.len() == 2 {
            let lower = name.to_ascii_lowercase();
            if lower == "cx" || lower == "cz" {
                if record {
                    self.gates.push((qubits[0], qubits[1], lower));
                }
            } else {
                log::warn!("{}:{}: ignoring two-qubit gate `{name}`", head.line, head.col);
            }
        }
        Ok(())
    }
}

pub(super) fn parse(src: &str) -> Result<Circuit, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        qregs: HashMap::new(),
        num_qubits: 0,
        gates: Vec::new(),
    };
    while p.peek().is_some() {
        p.statement(true)?;
    }
    let mut c = Circuit::new("", p.num_qubits);
    for (a, b, label) in p.gates {
        c.push(a, b, &label)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

    #[test]
    fn keeps_only_entangling_gates() {
        let src = format!(
            "{HEADER}qreg q[3];\ncreg c[3];\nh q[0];\ncx q[0],q[1];\nrz(pi/4) q[2];\ncz q[1], q[2];\nmeasure q[0] -> c[0];\n"
        );
        let c = parse(&src).unwrap();
        assert_eq!(c.num_qubits, 3);
        assert_eq!(c.operands(), vec![(0, 1), (1, 2)]);
        assert_eq!(c.gates[1].label, "cz");
    }

    #[test]
    fn multiple_registers_are_concatenated() {
        let src = format!("{HEADER}qreg a[2];\nqreg b[2];\ncx a[1],b[0];\n");
        let c = parse(&src).unwrap();
        assert_eq!(c.num_qubits, 4);
        assert_eq!(c.operands(), vec![(1, 2)]);
    }

    #[test]
    fn undeclared_qubit_reports_position() {
        let src = format!("{HEADER}qreg q[2];\ncx q[0],q[5];\n");
        match parse(&src) {
            Err(ParseError::UndeclaredQubit { line, col, index, .. }) => {
                assert_eq!((line, col, index), (4, 9, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
        let src = format!("{HEADER}qreg q[2];\ncx r[0],q[1];\n");
        assert!(matches!(parse(&src), Err(ParseError::UndeclaredQubit { .. })));
    }

    #[test]
    fn three_qubit_gate_is_unsupported() {
        let src = format!("{HEADER}qreg q[3];\nccx q[0],q[1],q[2];\n");
        assert!(matches!(
            parse(&src),
            Err(ParseError::UnsupportedGate { arity: 3, line: 4, col: 1, .. })
        ));
    }

    #[test]
    fn gate_definitions_and_conditionals_are_skipped() {
        let src = format!(
            "{HEADER}gate foo a,b {{ cx a,b; h a; }}\nqreg q[2];\ncreg c[1];\nif(c==1) cx q[0],q[1];\nfoo q[0],q[1];\ncx q[1],q[0];\n"
        );
        let c = parse(&src).unwrap();
        assert_eq!(c.operands(), vec![(1, 0)]);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let src = "qreg q[2]\ncx q[0],q[1];";
        match parse(src) {
            Err(ParseError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
