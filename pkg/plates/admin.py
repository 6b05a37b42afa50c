from django.contrib import admin
from django.utils.html import format_html

from .models import ConvergenceRun, ErrorRecord


class ErrorRecordInline(admin.TabularInline):
    model = ErrorRecord
    extra = 0
    readonly_fields = ['position', 'h', 'h_mean', 'n_dofs', 'rel_l2', 'rel_h1', 'rel_h2', 'residual']
    can_delete = False


@admin.register(ConvergenceRun)
class ConvergenceRunAdmin(admin.ModelAdmin):
    list_display = [
        'element', 'mesh_type', 'sizes', 'nu', 'bending_rigidity',
        'seed', 'slopes_display', 'deterministic', 'created_at',
    ]
    list_filter = ['element', 'mesh_type', 'deterministic', 'interpolant', 'created_at']
    search_fields = ['sizes']
    readonly_fields = ['slope_l2', 'slope_h1', 'slope_h2', 'created_at']
    inlines = [ErrorRecordInline]

    def slopes_display(self, obj):
        slopes = [obj.slope_l2, obj.slope_h1, obj.slope_h2]
        if all(s is None for s in slopes):
            return '-'
        return format_html(
            '<span title="L2 / H1 / H2">{} / {} / {}</span>',
            *('-' if s is None else f"{s:.2f}" for s in slopes),
        )
    slopes_display.short_description = 'Slopes'

    def has_change_permission(self, request, obj=None):
        return False


admin.site.site_header = "Plate VEM runs"
admin.site.site_title = "Plate VEM runs"
