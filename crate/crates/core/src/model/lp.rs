use alloc::string::String;
use core::fmt::Write;

use super::{Constraint, ModelSpec};

const TERMS_PER_LINE: usize = 8;

/// Renders the model, accumulated cuts included, in CPLEX LP format.
///
/// Coefficients use the shortest decimal form that reads back to the same
/// `f64`, so a parsed model reproduces the objective exactly. Cut rows with no
/// variables inside their node set are trivially satisfied and are skipped.
pub fn to_lp_string(model: &ModelSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ altour {} model: n = {}, {} binaries, {} rows, {} cuts",
        model.variant().as_str(),
        model.n(),
        model.variables().len(),
        model.constraints().len(),
        model.cuts().len()
    );
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, model, model.objective().iter().copied());
    out.push_str("\nSubject To\n");
    for row in model.constraints() {
        write_row(&mut out, model, row);
    }
    for k in 0..model.cuts().len() {
        let row = model.cut_row(k);
        if !row.terms.is_empty() {
            write_row(&mut out, model, &row);
        }
    }
    out.push_str("Binaries\n");
    for chunk in model.variables().chunks(TERMS_PER_LINE * 2) {
        out.push(' ');
        for (k, v) in chunk.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push_str(&v.name);
        }
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

fn write_row(out: &mut String, model: &ModelSpec, row: &Constraint) {
    let _ = write!(out, " {}:", row.name);
    write_terms(out, model, row.terms.iter().copied());
    let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
}

fn write_terms(out: &mut String, model: &ModelSpec, terms: impl Iterator<Item = (usize, f64)>) {
    for (k, (var, coef)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.variables()[var].name;
        let sign = if coef < 0.0 { '-' } else { '+' };
        let mag = coef.abs();
        if k == 0 && sign == '+' {
            out.push(' ');
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag == 1.0 {
            out.push_str(name);
        } else {
            let _ = write!(out, "{mag} {name}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::CostMatrix;
    use crate::model::build_simplified;
    use crate::problem::Problem;
    use alloc::vec;

    #[test]
    fn n2_listing() {
        let cm = CostMatrix::from_rows(2, vec![1.0, 2.5, 3.0, 0.25]).unwrap();
        let mut m = build_simplified(&Problem::new(cm, true, None).unwrap());
        let text = to_lp_string(&m);
        assert!(text.contains(" obj: x_0_2 + 2.5 x_0_3 + 3 x_1_2 + 0.25 x_1_3\n"));
        assert!(text.contains(" deg_0: x_0_2 + x_0_3 = 2\n"));
        assert!(text.contains(" fix_x_1_3: x_1_3 = 1\n"));
        assert!(text.contains("Binaries\n x_0_2 x_0_3 x_1_2 x_1_3\nEnd\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with(' ') && l.contains(" = ")).count(), 5);
        m.add_subtour_cut(&[0, 2]).unwrap();
        let with_cut = to_lp_string(&m);
        assert!(with_cut.contains(" sec_0: x_0_2 <= 1\n"));
        assert_eq!(with_cut, to_lp_string(&m));
    }
}
