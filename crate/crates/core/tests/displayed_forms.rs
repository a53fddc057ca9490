//! Closed forms and coproduct lines as they are displayed, checked
//! against the derived objects.

use num_rational::BigRational;
use ospq_core::freefield::{delta_decompose, ope_kernel, RationalKernel};
use ospq_core::relations::{ef_coefficient, relation_catalog, Current, Mode, RelationId};
use ospq_core::suite::{print_object, ObjectKind, PrintParams};

fn kernel_text(id: &str) -> String {
    print_object(ObjectKind::Kernel, id, &PrintParams::default()).unwrap()
}

fn line<'a>(text: &'a str, prefix: &str) -> &'a str {
    text.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("no {prefix} in {text}"))
}

#[test]
fn ee_kernel_factors() {
    let t = kernel_text("EE");
    assert_eq!(line(&t, "monomial"), "monomial: (z-w)");
    assert_eq!(line(&t, "numerator"), "numerator: (x p^-2 | q^2) (x q^2 p | q^2)");
    assert_eq!(line(&t, "denominator"), "denominator: (x p^-1 | q^2) (x q^2 p^2 | q^2)");
}

#[test]
fn ff_kernel_factors() {
    let t = kernel_text("FF");
    assert_eq!(line(&t, "monomial"), "monomial: (z-w)");
    assert_eq!(line(&t, "numerator"), "numerator: (x p^2 | q^2 p^2) (x q^2 p | q^2 p^2)");
    assert_eq!(line(&t, "denominator"), "denominator: (x p | q^2 p^2) (x q^2 | q^2 p^2)");
}

#[test]
fn ef_kernel_is_rational() {
    // (z - w) / (z² (1 - x p)(1 - x/p))
    let t = kernel_text("EF");
    assert_eq!(line(&t, "monomial"), "monomial: z^-1");
    assert_eq!(line(&t, "numerator"), "numerator: (1 - x)");
    assert_eq!(line(&t, "denominator"), "denominator: (1 - x p^-1) (1 - x p)");
}

#[test]
fn ef_delta_coefficients() {
    let params = PrintParams::default().params;
    let k = ope_kernel(&Current::E.spec(), &Current::F.spec(), 8, &params).unwrap();
    let terms = delta_decompose(&RationalKernel::from_kernel(&k).unwrap()).unwrap();
    assert_eq!(terms.len(), 2);
    let s: BigRational = params.sqrt_p().unwrap().clone();
    // 1/(s + 1/s) times (w s)^-1 and (z s)^-1
    let c = BigRational::from_integer(1.into()) / (&s + s.recip());
    let rendered: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
    assert_eq!(ef_coefficient().eval(&s).unwrap(), c, "{rendered:?}");
    let cat = relation_catalog(1, Mode::Corrected);
    let ef = cat.get(RelationId::EF).render();
    assert!(ef.contains("delta(z/(w s^2)) H+(w s^1)"), "{ef}");
    assert!(ef.contains("delta(w/(z s^2)) H-(z s^1)"), "{ef}");
}

#[test]
fn coproduct_lines() {
    let t = print_object(ObjectKind::Coproduct, "E", &PrintParams::default()).unwrap();
    assert_eq!(
        t.lines().next().unwrap(),
        "Delta+(E(z; q^(0))) = E(z; q^(0)) ⊗ 1 - H-(z p^(c_0/2); q^(0)) ⊗ E(z p^(c_0); q^(1))"
    );
    let t = print_object(ObjectKind::Coproduct, "Hm", &PrintParams::default()).unwrap();
    assert_eq!(t.lines().next().unwrap(), "Delta+(H-(z; q^(0))) = -H-(z p^(-c_1/2); q^(0)) ⊗ H-(z p^(c_0/2); q^(1))");
    let t = print_object(ObjectKind::Coproduct, "F", &PrintParams::default()).unwrap();
    assert_eq!(
        t.lines().nth(1).unwrap(),
        "Delta-(F(z; q^(0))) = F(z p^(c_0); q^(-1)) ⊗ H+(z p^(c_0/2); q^(0)) + 1 ⊗ F(z; q^(0))"
    );
}
