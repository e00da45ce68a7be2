use kodaira::generic_points::Parameter;
use kodaira::scalar::ApproxCtx;
use kodaira::verifier::{verify_claim, VerifyOptions};

fn opts(samples: usize, seed: u64) -> VerifyOptions {
    VerifyOptions {
        samples,
        seed,
        ..VerifyOptions::default()
    }
}

#[test]
fn exact_and_approximate_parameters_agree_on_counts() {
    let ctx = ApproxCtx::default();
    for (exact, approx) in [("1", "1,0"), ("2", "2,0"), ("-3/2", "-1.5,0")] {
        for r in 2..=4 {
            let a = verify_claim(&Parameter::parse(exact, ctx).unwrap(), r, &opts(12, 3)).unwrap();
            let b = verify_claim(&Parameter::parse(approx, ctx).unwrap(), r, &opts(12, 3)).unwrap();
            assert!(a.passed && b.passed, "λ = {exact}, r = {r}");
            assert_eq!(a.branch_count, b.branch_count);
            assert_eq!(a.projection_degree, b.projection_degree);
            assert_eq!(a.genus_by_recursion, b.genus_by_recursion);
            assert_eq!(a.branch_count, Some(1usize << r));
            for name in ["fiber_size", "membership", "jacobian_rank"] {
                assert_eq!(a.tally(name).unwrap().passed, b.tally(name).unwrap().passed);
            }
        }
    }
}

#[test]
fn report_bytes_do_not_depend_on_thread_count() {
    let lambda = Parameter::parse("1", ApproxCtx::default()).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = single.install(|| verify_claim(&lambda, 4, &opts(25, 11)).unwrap().to_json());
    let b = wide.install(|| verify_claim(&lambda, 4, &opts(25, 11)).unwrap().to_json());
    assert_eq!(a, b);
}

#[test]
fn other_seeds_pass_too() {
    let lambda = Parameter::parse("1", ApproxCtx::default()).unwrap();
    let a = verify_claim(&lambda, 3, &opts(5, 1)).unwrap();
    let b = verify_claim(&lambda, 3, &opts(5, 2)).unwrap();
    assert!(a.passed && b.passed);
    assert_eq!(a.seed, 1);
    assert_eq!(b.seed, 2);
}
