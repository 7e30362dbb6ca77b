// Mirrors of the service JSON contracts.

export interface Health {
  status: string;
  offline: boolean;
}

export interface ReferenceSummary {
  id: string;
  name: string;
  kind: "class" | "er";
  created_at: string;
}

export interface Diagnostic {
  line: number;
  column: number;
  message: string;
  severity: "error" | "warning";
}

export interface DifferenceDetail {
  expected: string | null;
  found: string | null;
}

export interface Difference {
  category: string;
  change: "missing" | "extra" | "modified";
  subject: string;
  detail: DifferenceDetail;
  severity: "major" | "minor";
}

export interface MatchingInfo {
  pairs: { reference: string; student: string; score: number }[];
  unmatched_reference: string[];
  unmatched_student: string[];
  threshold: number;
}

export interface DiffReport {
  reference_name: string;
  student_name: string;
  differences: Difference[];
  matching: MatchingInfo;
}

export interface Tag {
  code: string;
  difference_refs: number[];
  explanation: string;
}

export interface FeedbackSection {
  category: string;
  audience: "student" | "educator";
  hints: string[];
}

export interface Feedback {
  student_markdown: string;
  educator_markdown: string;
  sections: FeedbackSection[];
  warnings: string[];
}

export interface SubmissionResponse {
  submission_id: string;
  diff_report: DiffReport;
  tags: Tag[];
  feedback: Feedback;
}

export interface Stats {
  reference_id: string;
  total_submissions: number;
  counts: Record<string, number>;
  per_category: Record<string, number>;
}
